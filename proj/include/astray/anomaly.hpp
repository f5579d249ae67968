#pragma once

#include <set>
#include <string>
#include <vector>

#include "astray/ast.hpp"

namespace astray {

enum class AnomalyKind : std::uint8_t { SyntaxTree, CompilerInduced };

std::string_view anomaly_kind_label(AnomalyKind kind);

// Which representation looked anomalous in a compiler-induced pair.
enum class Direction : std::uint8_t { None, BytecodeLoud, SourceLoud };

std::string_view direction_label(Direction direction);

struct DetectorEntry {
    std::string name;
    double score = 0.0;
    double threshold = 0.0;
};

struct AnomalyRecord {
    std::string unit_id;
    AnomalyKind kind = AnomalyKind::SyntaxTree;
    std::vector<DetectorEntry> detectors;  // at least one entry
    Direction direction = Direction::None; // compiler-induced only
    std::set<std::string> tags;
    std::string origin_path;
    Span origin_span;
    std::string excerpt;

    double max_score() const {
        double best = 0.0;
        for (const DetectorEntry& d : detectors) best = std::max(best, d.score);
        return best;
    }
};

}  // namespace astray
