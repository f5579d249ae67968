#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "astray/ast.hpp"
#include "astray/errors.hpp"

namespace astray {

enum class UnitKind : std::uint8_t { Function, Class };

std::string_view unit_kind_label(UnitKind kind);

struct UnitOrigin {
    std::string path;
    Span span;
};

// A source-side analysis unit: one function declaration with its subtree.
struct CodeUnit {
    std::string unit_id;  // hex hash of the normalized tree
    UnitKind kind = UnitKind::Function;
    UnitOrigin origin;
    std::string display_name;
    SyntaxNode tree;  // function units always carry a tree
};

// A bytecode-side analysis unit: one class with the concatenated
// instruction mnemonics of its methods, operands stripped.
struct BytecodeUnit {
    std::string unit_id;
    std::string class_name;  // fully qualified
    std::vector<std::string> instructions;
    std::vector<std::string> source_link;  // linked CodeUnit ids, may be empty
};

struct IngestNote {
    std::string path;
    std::string message;
};

struct IngestResult {
    std::vector<CodeUnit> units;
    std::vector<IngestNote> notes;  // skipped files, unknown mnemonics, ...
};

struct BytecodeIngestResult {
    std::vector<BytecodeUnit> units;
    std::vector<IngestNote> notes;
};

struct CorpusManifest {
    std::string corpus_id;
    std::size_t function_count = 0;
    std::size_t class_count = 0;
    nlohmann::json config = nlohmann::json::object();  // ingest configuration snapshot

    nlohmann::json to_json() const;
    static CorpusManifest from_json(const nlohmann::json& j);
};

struct Corpus {
    std::vector<CodeUnit> functions;
    std::vector<BytecodeUnit> classes;
    std::map<std::string, std::vector<std::string>> links;  // class unit_id -> function unit_ids
    CorpusManifest manifest;
};

std::string compute_unit_id(const SyntaxNode& tree);
std::string compute_bytecode_unit_id(const std::string& class_name,
                                     const std::vector<std::string>& instructions);

// Parses each file and yields one CodeUnit per function declaration found,
// including nested and member functions. Files that fail to read or parse
// are skipped and recorded in the notes; they never abort the run.
// Files are processed in parallel; the result keeps (path order,
// declaration order).
IngestResult ingest_source(const std::vector<std::filesystem::path>& paths);

// Extracts function units from an already parsed file tree.
std::vector<CodeUnit> extract_function_units(const SyntaxNode& file_tree, const std::string& path);

// --- neutral tree format: one JSON tree per line, {kind, children, text?, span?} ---

nlohmann::json tree_to_json(const SyntaxNode& node);
SyntaxNode tree_from_json(const nlohmann::json& j, std::size_t record);

void serialize_trees(const std::vector<CodeUnit>& units, std::ostream& out);
void serialize_trees(const std::vector<CodeUnit>& units, const std::filesystem::path& path);

// Reads units back from the neutral tree format. Unit ids are recomputed
// from the trees, so a serialize/ingest round trip is id-stable.
std::vector<CodeUnit> ingest_trees(std::istream& in, const std::string& origin_path);
std::vector<CodeUnit> ingest_trees(const std::filesystem::path& path);

// --- bytecode listing format ---
//
//   class <fully.qualified.Name>
//   method <name>
//   <mnemonic>
//   ...
//   <blank line terminates the class>
//
// Unknown mnemonics are recorded in the notes and kept verbatim.

BytecodeIngestResult ingest_bytecode(std::istream& in, const std::string& origin_path);
BytecodeIngestResult ingest_bytecode(const std::filesystem::path& path);

// Converts `javap -c` style disassembler output into the listing format.
std::string convert_disassembly(std::istream& in);

bool is_known_mnemonic(std::string_view mnemonic);

// Keeps exactly one unit per distinct normalized tree; first occurrence wins.
std::vector<CodeUnit> dedup_units(const std::vector<CodeUnit>& units);

// Associates bytecode classes with source functions by class-name /
// file-path convention: a function links to a class when its display name
// starts with the class's simple name, or its file stem equals it.
std::map<std::string, std::vector<std::string>> build_links(
    const std::vector<CodeUnit>& functions, const std::vector<BytecodeUnit>& classes);

// --- corpus directory: manifest.json, units.jsonl, bytecode.jsonl ---

void persist_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace astray
