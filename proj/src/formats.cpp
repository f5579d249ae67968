#include "astray/formats.hpp"

#include <fstream>

#include "astray/errors.hpp"

namespace astray {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    return in;
}

}  // namespace

void write_dense_vectors(const std::filesystem::path& path, const DenseVectorFile& file) {
    std::ofstream out = open_out(path);
    if (file.meta) out << file.meta->dump() << "\n";
    if (file.scaler) out << file.scaler->dump() << "\n";
    if (file.pca) out << file.pca->dump() << "\n";
    for (std::size_t i = 0; i < file.ids.size(); ++i) {
        json values = json::array();
        for (Eigen::Index c = 0; c < file.rows.cols(); ++c) {
            values.push_back(file.rows(static_cast<Eigen::Index>(i), c));
        }
        out << json{{"unit_id", file.ids[i]}, {"values", std::move(values)}}.dump() << "\n";
    }
}

DenseVectorFile read_dense_vectors(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    DenseVectorFile file;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw FormatError("invalid JSON in vector file", lineno);
        if (j.contains("record")) {
            std::string kind = j["record"].get<std::string>();
            if (kind == "scaler") file.scaler = j;
            else if (kind == "pca") file.pca = j;
            else if (kind == "meta") file.meta = j;
            continue;
        }
        if (!j.contains("unit_id") || !j.contains("values")) {
            throw FormatError("vector line needs unit_id and values", lineno);
        }
        file.ids.push_back(j["unit_id"].get<std::string>());
        rows.push_back(j["values"].get<std::vector<double>>());
    }
    if (!rows.empty()) {
        file.rows.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != rows[0].size()) {
                throw FormatError("inconsistent vector dimensions", r + 1);
            }
            for (std::size_t c = 0; c < rows[r].size(); ++c) {
                file.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            }
        }
    }
    return file;
}

void write_sparse_vectors(const std::filesystem::path& path, const SparseVectorFile& file) {
    std::ofstream out = open_out(path);
    if (file.meta) out << file.meta->dump() << "\n";
    for (std::size_t i = 0; i < file.ids.size(); ++i) {
        json pairs = json::array();
        for (const auto& [idx, value] : file.vectors[i].pairs) {
            pairs.push_back({idx, value});
        }
        out << json{{"unit_id", file.ids[i]},
                    {"dim", file.vectors[i].dimension},
                    {"pairs", std::move(pairs)}}
                   .dump()
            << "\n";
    }
}

SparseVectorFile read_sparse_vectors(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    SparseVectorFile file;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw FormatError("invalid JSON in vector file", lineno);
        if (j.contains("record")) {
            if (j["record"].get<std::string>() == "meta") file.meta = j;
            continue;
        }
        if (!j.contains("unit_id") || !j.contains("dim") || !j.contains("pairs")) {
            throw FormatError("sparse line needs unit_id, dim and pairs", lineno);
        }
        SparseVector v;
        v.dimension = j["dim"].get<std::uint32_t>();
        for (const json& pair : j["pairs"]) {
            v.pairs.emplace_back(pair[0].get<std::uint32_t>(), pair[1].get<double>());
        }
        file.ids.push_back(j["unit_id"].get<std::string>());
        file.vectors.push_back(std::move(v));
    }
    return file;
}

void write_score_set(const std::filesystem::path& path, const AnomalyScoreSet& scores,
                     const json& config) {
    std::ofstream out = open_out(path);
    json j = scores.to_json();
    j["config"] = config;
    out << j.dump(2) << "\n";
}

AnomalyScoreSet read_score_set(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return AnomalyScoreSet::from_json(json::parse(in));
}

json record_to_json(const AnomalyRecord& record) {
    json detectors = json::array();
    for (const DetectorEntry& d : record.detectors) {
        detectors.push_back({{"name", d.name}, {"score", d.score}, {"threshold", d.threshold}});
    }
    json j{{"unit_id", record.unit_id},
           {"kind", std::string(anomaly_kind_label(record.kind))},
           {"detectors", std::move(detectors)},
           {"tags", std::vector<std::string>(record.tags.begin(), record.tags.end())},
           {"origin",
            {{"path", record.origin_path},
             {"span", {record.origin_span.first_line, record.origin_span.last_line}}}},
           {"excerpt", record.excerpt}};
    if (record.kind == AnomalyKind::CompilerInduced) {
        j["direction"] = std::string(direction_label(record.direction));
    }
    return j;
}

AnomalyRecord record_from_json(const json& j) {
    AnomalyRecord record;
    record.unit_id = j.at("unit_id").get<std::string>();
    record.kind = j.at("kind").get<std::string>() == "compiler-induced"
                      ? AnomalyKind::CompilerInduced
                      : AnomalyKind::SyntaxTree;
    for (const json& d : j.at("detectors")) {
        record.detectors.push_back({d.at("name").get<std::string>(),
                                    d.at("score").get<double>(),
                                    d.at("threshold").get<double>()});
    }
    for (const json& t : j.at("tags")) record.tags.insert(t.get<std::string>());
    if (j.contains("origin")) {
        record.origin_path = j["origin"].at("path").get<std::string>();
        record.origin_span = {j["origin"].at("span")[0].get<int>(),
                              j["origin"].at("span")[1].get<int>()};
    }
    if (j.contains("excerpt")) record.excerpt = j["excerpt"].get<std::string>();
    if (j.contains("direction")) {
        std::string d = j["direction"].get<std::string>();
        record.direction = d == "bytecode-loud"  ? Direction::BytecodeLoud
                           : d == "source-loud" ? Direction::SourceLoud
                                                : Direction::None;
    }
    return record;
}

void write_records(const std::filesystem::path& path, const std::vector<AnomalyRecord>& records) {
    std::ofstream out = open_out(path);
    for (const AnomalyRecord& r : records) out << record_to_json(r).dump() << "\n";
}

std::vector<AnomalyRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::vector<AnomalyRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw FormatError("invalid JSON in records file", lineno);
        records.push_back(record_from_json(j));
    }
    return records;
}

void write_links(const std::filesystem::path& path,
                 const std::map<std::string, std::vector<std::string>>& links) {
    std::ofstream out = open_out(path);
    json j = json::object();
    for (const auto& [cls, fns] : links) j[cls] = fns;
    out << j.dump(2) << "\n";
}

std::map<std::string, std::vector<std::string>> read_links(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    json j = json::parse(in);
    std::map<std::string, std::vector<std::string>> links;
    for (const auto& [cls, fns] : j.items()) {
        links[cls] = fns.get<std::vector<std::string>>();
    }
    return links;
}

}  // namespace astray
