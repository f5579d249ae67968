#include "astray/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "astray/parser.hpp"

namespace astray {

namespace {

using nlohmann::json;

// Standard JVM instruction mnemonics (JVMS chapter 6).
const std::unordered_set<std::string_view>& mnemonic_table() {
    static const std::unordered_set<std::string_view> table = {
        "nop", "aconst_null", "iconst_m1", "iconst_0", "iconst_1", "iconst_2", "iconst_3",
        "iconst_4", "iconst_5", "lconst_0", "lconst_1", "fconst_0", "fconst_1", "fconst_2",
        "dconst_0", "dconst_1", "bipush", "sipush", "ldc", "ldc_w", "ldc2_w", "iload", "lload",
        "fload", "dload", "aload", "iload_0", "iload_1", "iload_2", "iload_3", "lload_0",
        "lload_1", "lload_2", "lload_3", "fload_0", "fload_1", "fload_2", "fload_3", "dload_0",
        "dload_1", "dload_2", "dload_3", "aload_0", "aload_1", "aload_2", "aload_3", "iaload",
        "laload", "faload", "daload", "aaload", "baload", "caload", "saload", "istore", "lstore",
        "fstore", "dstore", "astore", "istore_0", "istore_1", "istore_2", "istore_3", "lstore_0",
        "lstore_1", "lstore_2", "lstore_3", "fstore_0", "fstore_1", "fstore_2", "fstore_3",
        "dstore_0", "dstore_1", "dstore_2", "dstore_3", "astore_0", "astore_1", "astore_2",
        "astore_3", "iastore", "lastore", "fastore", "dastore", "aastore", "bastore", "castore",
        "sastore", "pop", "pop2", "dup", "dup_x1", "dup_x2", "dup2", "dup2_x1", "dup2_x2", "swap",
        "iadd", "ladd", "fadd", "dadd", "isub", "lsub", "fsub", "dsub", "imul", "lmul", "fmul",
        "dmul", "idiv", "ldiv", "fdiv", "ddiv", "irem", "lrem", "frem", "drem", "ineg", "lneg",
        "fneg", "dneg", "ishl", "lshl", "ishr", "lshr", "iushr", "lushr", "iand", "land", "ior",
        "lor", "ixor", "lxor", "iinc", "i2l", "i2f", "i2d", "l2i", "l2f", "l2d", "f2i", "f2l",
        "f2d", "d2i", "d2l", "d2f", "i2b", "i2c", "i2s", "lcmp", "fcmpl", "fcmpg", "dcmpl",
        "dcmpg", "ifeq", "ifne", "iflt", "ifge", "ifgt", "ifle", "if_icmpeq", "if_icmpne",
        "if_icmplt", "if_icmpge", "if_icmpgt", "if_icmple", "if_acmpeq", "if_acmpne", "goto",
        "jsr", "ret", "tableswitch", "lookupswitch", "ireturn", "lreturn", "freturn", "dreturn",
        "areturn", "return", "getstatic", "putstatic", "getfield", "putfield", "invokevirtual",
        "invokespecial", "invokestatic", "invokeinterface", "invokedynamic", "new", "newarray",
        "anewarray", "arraylength", "athrow", "checkcast", "instanceof", "monitorenter",
        "monitorexit", "wide", "multianewarray", "ifnull", "ifnonnull", "goto_w", "jsr_w",
    };
    return table;
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string function_name(const SyntaxNode& fn) {
    for (const SyntaxNode& child : fn.children) {
        if (child.kind == NodeKind::Identifier) return child.text;
    }
    return "<anonymous>";
}

void collect_functions(const SyntaxNode& node, const std::string& path,
                       const std::string& name_prefix, std::vector<CodeUnit>& out) {
    std::string prefix = name_prefix;
    if (node.kind == NodeKind::Function) {
        CodeUnit unit;
        unit.kind = UnitKind::Function;
        unit.tree = node;
        unit.unit_id = compute_unit_id(node);
        unit.origin = {path, node.span};
        unit.display_name =
            name_prefix.empty() ? function_name(node) : name_prefix + "." + function_name(node);
        prefix = unit.display_name;
        out.push_back(std::move(unit));
    } else if (node.kind == NodeKind::Class) {
        for (const SyntaxNode& child : node.children) {
            if (child.kind == NodeKind::Identifier) {
                prefix = name_prefix.empty() ? child.text : name_prefix + "." + child.text;
                break;
            }
        }
    }
    for (const SyntaxNode& child : node.children) {
        collect_functions(child, path, prefix, out);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string simple_class_name(const std::string& fq_name) {
    std::string name = fq_name;
    if (auto dot = name.find_last_of('.'); dot != std::string::npos) {
        name = name.substr(dot + 1);
    }
    // Synthetic inner classes (Foo$bar$1) belong to their outer class.
    if (auto dollar = name.find('$'); dollar != std::string::npos) {
        name = name.substr(0, dollar);
    }
    return name;
}

}  // namespace

std::string_view unit_kind_label(UnitKind kind) {
    return kind == UnitKind::Function ? "function" : "class";
}

std::string compute_unit_id(const SyntaxNode& tree) {
    return normalized_tree_hash_hex(tree);
}

std::string compute_bytecode_unit_id(const std::string& class_name,
                                     const std::vector<std::string>& instructions) {
    std::string joined = class_name;
    for (const std::string& instr : instructions) {
        joined += '\x1f';
        joined += instr;
    }
    // Reuse the tree hasher on a single synthetic leaf carrying the payload.
    return normalized_tree_hash_hex(make_leaf(NodeKind::Literal, std::move(joined)));
}

std::vector<CodeUnit> extract_function_units(const SyntaxNode& file_tree,
                                             const std::string& path) {
    std::vector<CodeUnit> out;
    collect_functions(file_tree, path, "", out);
    return out;
}

IngestResult ingest_source(const std::vector<std::filesystem::path>& paths) {
    struct Slot {
        std::vector<CodeUnit> units;
        std::vector<IngestNote> notes;
    };
    std::vector<Slot> slots(paths.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= paths.size()) return;
            const std::filesystem::path& path = paths[i];
            try {
                std::string source = read_file(path);
                SyntaxNode file = parse_source(source);
                slots[i].units = extract_function_units(file, path.string());
            } catch (const Error& e) {
                slots[i].notes.push_back({path.string(), std::string("skipped: ") + e.what()});
            }
        }
    };

    std::size_t n_threads = std::min<std::size_t>(
        paths.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    // Deterministic merge: input path order, declaration order within a file.
    IngestResult result;
    for (Slot& slot : slots) {
        std::move(slot.units.begin(), slot.units.end(), std::back_inserter(result.units));
        std::move(slot.notes.begin(), slot.notes.end(), std::back_inserter(result.notes));
    }
    return result;
}

json tree_to_json(const SyntaxNode& node) {
    json j;
    j["kind"] = std::string(node_kind_label(node.kind));
    json children = json::array();
    for (const SyntaxNode& child : node.children) children.push_back(tree_to_json(child));
    j["children"] = std::move(children);
    if (!node.text.empty()) j["text"] = node.text;
    if (node.span.first_line != 0 || node.span.last_line != 0) {
        j["span"] = {node.span.first_line, node.span.last_line};
    }
    return j;
}

SyntaxNode tree_from_json(const json& j, std::size_t record) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw FormatError("tree record must be an object with a 'kind' field", record);
    }
    std::string label = j["kind"].get<std::string>();
    auto kind = node_kind_from_label(label);
    if (!kind) {
        throw FormatError("unknown node kind '" + label + "'", record);
    }
    SyntaxNode node;
    node.kind = *kind;
    if (j.contains("text")) {
        if (!j["text"].is_string()) throw FormatError("'text' must be a string", record);
        node.text = j["text"].get<std::string>();
    }
    if (j.contains("span")) {
        const json& span = j["span"];
        if (!span.is_array() || span.size() != 2) {
            throw FormatError("'span' must be a [first, last] pair", record);
        }
        node.span = {span[0].get<int>(), span[1].get<int>()};
    }
    if (j.contains("children")) {
        if (!j["children"].is_array()) throw FormatError("'children' must be an array", record);
        for (const json& child : j["children"]) {
            node.children.push_back(tree_from_json(child, record));
        }
    }
    if (!node.children.empty() && !node.text.empty()) {
        throw FormatError("only leaf nodes may carry text", record);
    }
    return node;
}

void serialize_trees(const std::vector<CodeUnit>& units, std::ostream& out) {
    for (const CodeUnit& unit : units) {
        out << tree_to_json(unit.tree).dump() << "\n";
    }
}

void serialize_trees(const std::vector<CodeUnit>& units, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    serialize_trees(units, out);
}

std::vector<CodeUnit> ingest_trees(std::istream& in, const std::string& origin_path) {
    std::vector<CodeUnit> units;
    std::string line;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        ++record;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(std::string("invalid JSON: ") + e.what(), record);
        }
        SyntaxNode tree = tree_from_json(j, record);
        if (tree.kind != NodeKind::Function) {
            throw FormatError("expected a FUNCTION-rooted tree, got '" +
                                  std::string(node_kind_label(tree.kind)) + "'",
                              record);
        }
        CodeUnit unit;
        unit.kind = UnitKind::Function;
        unit.unit_id = compute_unit_id(tree);
        unit.display_name = function_name(tree);
        unit.origin.path = origin_path;
        unit.origin.span = tree.span.first_line != 0
                               ? tree.span
                               : Span{static_cast<int>(record), static_cast<int>(record)};
        unit.tree = std::move(tree);
        units.push_back(std::move(unit));
    }
    return units;
}

std::vector<CodeUnit> ingest_trees(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    return ingest_trees(in, path.string());
}

BytecodeIngestResult ingest_bytecode(std::istream& in, const std::string& origin_path) {
    BytecodeIngestResult result;
    std::string line;
    std::size_t lineno = 0;

    std::string current_class;
    std::vector<std::string> instructions;
    bool in_class = false;

    auto finish_class = [&] {
        if (!in_class) return;
        if (instructions.empty()) {
            result.notes.push_back(
                {origin_path, "class " + current_class + " has no instructions, skipped"});
        } else {
            BytecodeUnit unit;
            unit.class_name = current_class;
            unit.instructions = instructions;
            unit.unit_id = compute_bytecode_unit_id(current_class, instructions);
            result.units.push_back(std::move(unit));
        }
        in_class = false;
        current_class.clear();
        instructions.clear();
    };

    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) {
            finish_class();
            continue;
        }
        std::string trimmed = line.substr(start);
        if (trimmed.rfind("class ", 0) == 0) {
            finish_class();
            current_class = trimmed.substr(6);
            if (current_class.empty()) {
                throw FormatError("class header without a name", lineno);
            }
            in_class = true;
            continue;
        }
        if (trimmed.rfind("method ", 0) == 0) {
            if (!in_class) throw FormatError("method header outside a class", lineno);
            continue;  // methods only delimit; their instructions are concatenated
        }
        if (!in_class) {
            throw FormatError("instruction '" + trimmed + "' outside a class", lineno);
        }
        if (trimmed.find(' ') != std::string::npos) {
            throw FormatError("expected a single mnemonic, got '" + trimmed + "'", lineno);
        }
        std::string mnemonic = to_lower(trimmed);
        if (!is_known_mnemonic(mnemonic)) {
            result.notes.push_back(
                {origin_path, "unknown mnemonic '" + mnemonic + "' at line " +
                                  std::to_string(lineno) + ", kept verbatim"});
        }
        instructions.push_back(std::move(mnemonic));
    }
    finish_class();
    return result;
}

BytecodeIngestResult ingest_bytecode(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    return ingest_bytecode(in, path.string());
}

std::string convert_disassembly(std::istream& in) {
    std::ostringstream out;
    std::string line;
    std::string current_class;
    bool emitted_any = false;

    auto identifier_at = [](const std::string& s, std::size_t pos) {
        std::size_t end = pos;
        while (end < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '.' ||
                s[end] == '_' || s[end] == '$')) {
            ++end;
        }
        return s.substr(pos, end - pos);
    };

    while (std::getline(in, line)) {
        // class/interface/enum header, e.g. "public final class com.example.Foo {"
        if (line.find('{') != std::string::npos) {
            for (std::string_view intro : {"class ", "interface ", "enum "}) {
                std::size_t at = line.find(intro);
                if (at != std::string::npos) {
                    std::string name = identifier_at(line, at + intro.size());
                    if (!name.empty()) {
                        if (emitted_any) out << "\n";
                        current_class = name;
                        out << "class " << name << "\n";
                        emitted_any = true;
                    }
                    break;
                }
            }
            if (line.find(" class ") != std::string::npos ||
                line.rfind("class ", 0) == 0) {
                continue;
            }
        }
        // numbered instruction line, e.g. "   4: invokevirtual #12  // Method ..."
        std::size_t pos = line.find_first_not_of(" \t");
        if (pos != std::string::npos && std::isdigit(static_cast<unsigned char>(line[pos]))) {
            std::size_t colon = line.find(':', pos);
            if (colon != std::string::npos) {
                std::size_t mstart = line.find_first_not_of(" \t", colon + 1);
                if (mstart != std::string::npos &&
                    (std::isalpha(static_cast<unsigned char>(line[mstart])))) {
                    std::size_t mend = mstart;
                    while (mend < line.size() &&
                           (std::isalnum(static_cast<unsigned char>(line[mend])) ||
                            line[mend] == '_')) {
                        ++mend;
                    }
                    out << to_lower(line.substr(mstart, mend - mstart)) << "\n";
                    continue;
                }
            }
        }
        // method signature line, e.g. "  public final int bar(int);"
        if (!current_class.empty() && pos != std::string::npos) {
            std::size_t paren = line.find('(');
            if (paren != std::string::npos && line.find(';') != std::string::npos &&
                line.find("Code:") == std::string::npos) {
                std::size_t name_end = paren;
                std::size_t name_start = name_end;
                while (name_start > 0 &&
                       (std::isalnum(static_cast<unsigned char>(line[name_start - 1])) ||
                        line[name_start - 1] == '_' || line[name_start - 1] == '$' ||
                        line[name_start - 1] == '.')) {
                    --name_start;
                }
                std::string name = line.substr(name_start, name_end - name_start);
                if (!name.empty()) {
                    if (auto dot = name.find_last_of('.'); dot != std::string::npos) {
                        name = name.substr(dot + 1);
                    }
                    if (name == simple_class_name(current_class)) name = "<init>";
                    out << "method " << name << "\n";
                }
            } else if (line.find("static {") != std::string::npos ||
                       line.find("static {};") != std::string::npos) {
                out << "method <clinit>\n";
            }
        }
    }
    return out.str();
}

bool is_known_mnemonic(std::string_view mnemonic) {
    return mnemonic_table().count(mnemonic) > 0;
}

std::vector<CodeUnit> dedup_units(const std::vector<CodeUnit>& units) {
    std::vector<CodeUnit> out;
    std::unordered_set<std::string> seen;
    out.reserve(units.size());
    for (const CodeUnit& unit : units) {
        if (seen.insert(unit.unit_id).second) out.push_back(unit);
    }
    return out;
}

std::map<std::string, std::vector<std::string>> build_links(
    const std::vector<CodeUnit>& functions, const std::vector<BytecodeUnit>& classes) {
    std::map<std::string, std::vector<std::string>> links;
    for (const BytecodeUnit& cls : classes) {
        std::string simple = simple_class_name(cls.class_name);
        std::vector<std::string> linked;
        for (const CodeUnit& fn : functions) {
            bool by_name = fn.display_name.rfind(simple + ".", 0) == 0;
            bool by_file = std::filesystem::path(fn.origin.path).stem().string() == simple;
            if (by_name || by_file) linked.push_back(fn.unit_id);
        }
        std::sort(linked.begin(), linked.end());
        linked.erase(std::unique(linked.begin(), linked.end()), linked.end());
        if (!linked.empty()) links[cls.unit_id] = std::move(linked);
    }
    return links;
}

json CorpusManifest::to_json() const {
    json j;
    j["corpus_id"] = corpus_id;
    j["counts"] = {{"function", function_count}, {"class", class_count}};
    j["config"] = config;
    return j;
}

CorpusManifest CorpusManifest::from_json(const json& j) {
    CorpusManifest m;
    m.corpus_id = j.at("corpus_id").get<std::string>();
    m.function_count = j.at("counts").at("function").get<std::size_t>();
    m.class_count = j.at("counts").at("class").get<std::size_t>();
    if (j.contains("config")) m.config = j.at("config");
    return m;
}

namespace {

json unit_to_json(const CodeUnit& unit) {
    json j;
    j["unit_id"] = unit.unit_id;
    j["kind"] = std::string(unit_kind_label(unit.kind));
    j["display_name"] = unit.display_name;
    j["origin"] = {{"path", unit.origin.path},
                   {"span", {unit.origin.span.first_line, unit.origin.span.last_line}}};
    j["tree"] = tree_to_json(unit.tree);
    return j;
}

CodeUnit unit_from_json(const json& j, std::size_t record) {
    CodeUnit unit;
    unit.unit_id = j.at("unit_id").get<std::string>();
    unit.kind = j.at("kind").get<std::string>() == "class" ? UnitKind::Class : UnitKind::Function;
    unit.display_name = j.at("display_name").get<std::string>();
    unit.origin.path = j.at("origin").at("path").get<std::string>();
    unit.origin.span = {j.at("origin").at("span")[0].get<int>(),
                        j.at("origin").at("span")[1].get<int>()};
    unit.tree = tree_from_json(j.at("tree"), record);
    return unit;
}

std::string corpus_id_of(const Corpus& corpus) {
    std::vector<std::string> ids;
    for (const CodeUnit& u : corpus.functions) ids.push_back(u.unit_id);
    for (const BytecodeUnit& u : corpus.classes) ids.push_back(u.unit_id);
    std::sort(ids.begin(), ids.end());
    SyntaxNode synthetic = make_leaf(NodeKind::Literal, "");
    for (const std::string& id : ids) {
        synthetic.text += id;
        synthetic.text += '\x1f';
    }
    return normalized_tree_hash_hex(synthetic);
}

}  // namespace

void persist_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::vector<const CodeUnit*> fns;
    for (const CodeUnit& u : corpus.functions) fns.push_back(&u);
    std::sort(fns.begin(), fns.end(),
              [](const CodeUnit* a, const CodeUnit* b) { return a->unit_id < b->unit_id; });
    {
        std::ofstream out(dir / "units.jsonl", std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir / "units.jsonl").string());
        for (const CodeUnit* u : fns) out << unit_to_json(*u).dump() << "\n";
    }

    std::vector<const BytecodeUnit*> classes;
    for (const BytecodeUnit& u : corpus.classes) classes.push_back(&u);
    std::sort(classes.begin(), classes.end(),
              [](const BytecodeUnit* a, const BytecodeUnit* b) { return a->unit_id < b->unit_id; });
    {
        std::ofstream out(dir / "bytecode.jsonl", std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir / "bytecode.jsonl").string());
        for (const BytecodeUnit* u : classes) {
            json j;
            j["unit_id"] = u->unit_id;
            j["class_name"] = u->class_name;
            j["instructions"] = u->instructions;
            if (!u->source_link.empty()) j["source_link"] = u->source_link;
            out << j.dump() << "\n";
        }
    }

    CorpusManifest manifest = corpus.manifest;
    manifest.corpus_id = corpus_id_of(corpus);
    manifest.function_count = corpus.functions.size();
    manifest.class_count = corpus.classes.size();
    json mj = manifest.to_json();
    json links = json::object();
    for (const auto& [cls, fns_linked] : corpus.links) links[cls] = fns_linked;
    mj["links"] = links;
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << mj.dump(2) << "\n";
}

Corpus load_corpus(const std::filesystem::path& dir) {
    Corpus corpus;
    std::ifstream manifest_in(dir / "manifest.json", std::ios::binary);
    if (!manifest_in) throw IoError("not a corpus directory (missing manifest.json): " + dir.string());
    json mj = json::parse(manifest_in);
    corpus.manifest = CorpusManifest::from_json(mj);
    if (mj.contains("links")) {
        for (const auto& [cls, fns] : mj["links"].items()) {
            corpus.links[cls] = fns.get<std::vector<std::string>>();
        }
    }

    std::ifstream units_in(dir / "units.jsonl", std::ios::binary);
    if (units_in) {
        std::string line;
        std::size_t record = 0;
        while (std::getline(units_in, line)) {
            ++record;
            if (line.empty()) continue;
            corpus.functions.push_back(unit_from_json(json::parse(line), record));
        }
    }

    std::ifstream bc_in(dir / "bytecode.jsonl", std::ios::binary);
    if (bc_in) {
        std::string line;
        while (std::getline(bc_in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            BytecodeUnit unit;
            unit.unit_id = j.at("unit_id").get<std::string>();
            unit.class_name = j.at("class_name").get<std::string>();
            unit.instructions = j.at("instructions").get<std::vector<std::string>>();
            if (j.contains("source_link")) {
                unit.source_link = j.at("source_link").get<std::vector<std::string>>();
            }
            corpus.classes.push_back(std::move(unit));
        }
    }
    return corpus;
}

}  // namespace astray
