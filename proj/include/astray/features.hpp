#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "astray/corpus.hpp"
#include "astray/errors.hpp"

namespace astray {

inline constexpr int kMetricCount = 51;          // 49 quantitative + 2 binary
inline constexpr int kQuantitativeMetricCount = 49;
inline constexpr const char* kMetricCatalogVersion = "astray-metrics-1";

struct MetricInfo {
    std::string name;
    int group;         // 1 general, 2 structural, 3 external, 4 element counts
    bool binary;
};

// The fixed 51-slot metric catalog; binary metrics occupy the last 2 slots.
const std::vector<MetricInfo>& metric_catalog();
int metric_index(std::string_view name);

struct MetricVector {
    std::vector<double> values;  // length kMetricCount
    std::string catalog_version = kMetricCatalogVersion;

    double at(std::string_view name) const { return values.at(metric_index(name)); }
};

// Computes the explicit feature vector of a function unit. Total over valid
// trees; all values are finite, non-negative, binary slots in {0, 1}.
MetricVector compute_metrics(const CodeUnit& unit);
MetricVector compute_metrics(const SyntaxNode& function_tree);

// --- N-grams ---

struct NGram {
    std::vector<std::string> items;

    std::size_t arity() const { return items.size(); }
    friend bool operator==(const NGram&, const NGram&) = default;
    friend auto operator<=>(const NGram&, const NGram&) = default;
};

using NGramCounts = std::map<NGram, std::uint64_t>;

// Counts, for every node, every downward parent-child chain of length
// 1..n_max starting at that node.
NGramCounts extract_tree_ngrams(const SyntaxNode& tree, int n_max);

// Counts every contiguous subsequence of length 1..n_max once per start
// position. The window only drives the incremental extraction; it never
// changes the counts (requires window >= n_max).
NGramCounts extract_bytecode_ngrams(const std::vector<std::string>& instructions, int n_max,
                                    int window);

enum class NGramDomain : std::uint8_t { Tree, Bytecode };

std::string_view ngram_domain_label(NGramDomain domain);

struct VocabEntry {
    NGram gram;
    std::uint32_t index;
    std::uint64_t document_frequency;
};

struct NGramVocabulary {
    NGramDomain domain = NGramDomain::Tree;
    std::uint64_t corpus_size = 0;
    int min_df = 0;
    double max_df_ratio = 1.0;
    std::vector<VocabEntry> entries;  // ordered by index

    std::size_t size() const { return entries.size(); }
    const VocabEntry* find(const NGram& gram) const;
    void rebuild_lookup();  // call after mutating entries directly

    nlohmann::json to_json() const;
    static NGramVocabulary from_json(const nlohmann::json& j);

private:
    std::vector<std::uint32_t> lookup_;  // entry positions ordered by gram
};

// Retains N-grams with min_df <= df <= max_df_ratio * corpus_size. Indices
// are assigned by descending document frequency, ties broken by ascending
// lexicographic order of the items.
NGramVocabulary build_vocabulary(const std::vector<NGramCounts>& per_unit_counts, int min_df,
                                 double max_df_ratio, NGramDomain domain);

struct SparseVector {
    std::uint32_t dimension = 0;
    std::vector<std::pair<std::uint32_t, double>> pairs;  // sorted, counts > 0

    double l2_norm() const;
};

// Projects a count multiset onto the vocabulary; out-of-vocabulary N-grams
// are dropped.
SparseVector vectorize(const NGramCounts& counts, const NGramVocabulary& vocab);

}  // namespace astray
