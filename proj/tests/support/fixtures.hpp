#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

inline std::filesystem::path test_data_dir() {
    return std::filesystem::path(ASTRAY_TEST_DATA_DIR);
}

inline std::string read_fixture(const std::string& relative) {
    std::ifstream in(test_data_dir() / relative, std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture: " + relative);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline std::vector<std::string> fixture_names(const std::string& subdir) {
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(test_data_dir() / subdir)) {
        if (entry.path().extension() == ".kt") names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

inline std::vector<std::string> corpus_fixture_names() { return fixture_names("corpus"); }
inline std::vector<std::string> reject_fixture_names() { return fixture_names("rejects"); }
