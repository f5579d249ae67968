#include "astray/anomaly.hpp"

namespace astray {

std::string_view anomaly_kind_label(AnomalyKind kind) {
    return kind == AnomalyKind::SyntaxTree ? "syntax-tree" : "compiler-induced";
}

std::string_view direction_label(Direction direction) {
    switch (direction) {
        case Direction::BytecodeLoud: return "bytecode-loud";
        case Direction::SourceLoud: return "source-loud";
        case Direction::None: break;
    }
    return "none";
}

}  // namespace astray
