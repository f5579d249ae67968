#pragma once

// Synthetic corpus generator: renders Kotlin-subset functions from a fixed
// set of structural templates with randomized names, literals and repeat
// counts, plus planted extreme units for recall experiments.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "astray/corpus.hpp"
#include "astray/parser.hpp"

namespace corpus_gen {

// Digit count drawn uniformly so text-length metrics spread out instead of
// concentrating on one value.
inline std::string random_number_text(std::mt19937_64& rng, int max_digits) {
    int digits = std::uniform_int_distribution<int>(1, max_digits)(rng);
    long lo = 1;
    for (int i = 1; i < digits; ++i) lo *= 10;
    long hi = lo * 10 - 1;
    if (digits == 1) lo = 0;
    return std::to_string(std::uniform_int_distribution<long>(lo, hi)(rng));
}

inline std::string ident(std::mt19937_64& rng, const char* stem) {
    return std::string(stem) + random_number_text(rng, 7);
}

// Local-property padding: adds continuous variety to the size metrics so
// generated units rarely collide in metric space.
inline std::string body_padding(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pads_dist(0, 4);
    std::ostringstream out;
    int pads = pads_dist(rng);
    for (int i = 0; i < pads; ++i) {
        if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) out << "\n";
        out << "    val " << ident(rng, "pad") << " = " << random_number_text(rng, 6) << "\n";
    }
    return out.str();
}

// One function from one of 20 structural templates.
inline std::string template_function(int shape, std::mt19937_64& rng) {
    auto lit = [&rng](std::mt19937_64&) { return random_number_text(rng, 4); };
    std::uniform_int_distribution<int> reps_dist(1, 4);
    int reps = reps_dist(rng);
    std::string name = ident(rng, "fn");
    std::string a = ident(rng, "a");
    std::string b = ident(rng, "b");
    std::string c = ident(rng, "c");
    std::string pad = body_padding(rng);
    std::ostringstream out;
    switch (shape % 20) {
        case 0: {
            out << "fun " << name << "(" << a << ": Int, " << b << ": Int): Int = " << a << " * "
                << lit(rng) << " + " << b << " - " << lit(rng);
            static const char* ops[] = {" + ", " - ", " * ", " % "};
            for (int i = 0; i < reps - 1; ++i) {
                out << ops[std::uniform_int_distribution<int>(0, 3)(rng)]
                    << (i % 2 == 0 ? a : b);
            }
            out << "\n";
            break;
        }
        case 1:
            out << "fun " << name << "(" << a << ": Int): Int {\n"
                << pad
                << "    if (" << a << " > " << lit(rng) << ") {\n        return " << lit(rng)
                << "\n    } else {\n        return " << lit(rng) << "\n    }\n}\n";
            break;
        case 2:
            out << "fun " << name << "(" << a << ": List<Int>): Int {\n    var " << b << " = 0\n"
                << pad;
            for (int i = 0; i < reps; ++i) {
                out << "    for (" << c << i << " in " << a << ") {\n        " << b << " += " << c
                    << i << "\n    }\n";
            }
            out << "    return " << b << "\n}\n";
            break;
        case 3:
            out << "fun " << name << "(" << a << ": Int): Int {\n    var " << b << " = " << a
                << "\n" << pad << "    while (" << b << " > " << lit(rng) << ") {\n        " << b << " -= "
                << lit(rng) << "\n    }\n    return " << b << "\n}\n";
            break;
        case 4: {
            out << "fun " << name << "(" << a << ": Int): String = when (" << a << ") {\n";
            int branches = 2 + reps + std::uniform_int_distribution<int>(0, 6)(rng);
            for (int i = 0; i < branches; ++i) {
                out << "    " << i << " -> \"v" << i << "\"\n";
            }
            out << "    else -> \"big\"\n}\n";
            break;
        }
        case 5:
            out << "fun " << name << "(" << a << ": String, " << b << ": Int): String {\n"
                << pad
                << "    return \"name=$" << a << " value=${" << b << " + " << lit(rng)
                << "} tail\"\n}\n";
            break;
        case 6:
            out << "fun " << name << "(" << a << ": List<Int>): List<Int> {\n" << pad
                << "    return " << a
                << ".map { x -> x * " << lit(rng) << " }.filter { x -> x > " << lit(rng)
                << " }\n}\n";
            break;
        case 7:
            out << "fun " << name << "(" << a << ": Int, " << b << ": Int): Int {\n"
                << pad
                << "    return try {\n        " << a << " / " << b
                << "\n    } catch (e: ArithmeticException) {\n        " << lit(rng)
                << "\n    }\n}\n";
            break;
        case 8:
            out << "fun " << name << "(" << a << ": Int): Int {\n" << pad;
            for (int i = 0; i < reps + 1; ++i) {
                out << "    val " << b << i << " = " << a << " + " << lit(rng) << "\n";
            }
            out << "    return " << b << "0\n}\n";
            break;
        case 9:
            out << "fun " << name << "(" << a << ": Int): Int {\n" << pad << "    if (" << a << " > "
                << lit(rng) << ") {\n        if (" << a << " > 1" << lit(rng)
                << ") {\n            return 2\n        }\n        return 1\n    }\n"
                << "    return 0\n}\n";
            break;
        case 10:
            out << "fun " << name << "(" << a << ": Query): Int {\n" << pad << "    return " << a
                << ".alpha().beta(" << lit(rng) << ").gamma().count()\n}\n";
            break;
        case 11:
            out << "fun " << name << "(" << a << ": Array<Int>, " << b << ": Int): Int {\n"
                << pad
                << "    return " << a << "[" << b << "] + " << a << "[" << b << " + 1] * "
                << lit(rng) << "\n}\n";
            break;
        case 12:
            out << "fun " << name << "(" << a << ": Int?, " << b << ": Int?): Int {\n" << pad
                << "    return "
                << a << " ?: " << b << " ?: " << lit(rng) << "\n}\n";
            break;
        case 13:
            out << "suspend fun " << name << "(" << a << ": Int): Int {\n" << pad
                << "    return fetchValue("
                << a << " + " << lit(rng) << ")\n}\n";
            break;
        case 14:
            out << "fun String." << name << "(): String {\n" << pad
                << "    return this + \"#" << lit(rng)
                << "\"\n}\n";
            break;
        case 15:
            out << "@Visible(" << lit(rng) << ")\nfun " << name << "(" << a << ": Int = "
                << lit(rng) << ", " << b << ": Int = " << lit(rng) << "): Int = " << a << " + "
                << b << "\n";
            break;
        case 16:
            out << "fun <T : Comparable<T>> " << name << "(" << a << ": List<T>, " << b
                << ": T): Boolean {\n" << pad << "    return " << a << ".contains(" << b << ")\n}\n";
            break;
        case 17:
            out << "fun " << name << "(" << a << ": Int): Int {\n" << pad
                << "    fun inner" << b << "("
                << c << ": Int): Int = " << c << " * " << lit(rng) << "\n    return inner" << b
                << "(" << a << ")\n}\n";
            break;
        case 18:
            out << "fun " << name << "(" << a << ": Boolean, " << b << ": Boolean): Boolean {\n"
                << pad
                << "    return !" << a << " && (" << b << " || "
                << (std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? "true" : "false")
                << ")\n}\n";
            break;
        default:
            out << "fun " << name << "(" << a << ": Int): Int {\n    var " << b << " = " << a
                << "\n" << pad;
            for (int i = 0; i < reps; ++i) {
                out << "    " << b << " = " << b << " * " << lit(rng) << " % 1" << lit(rng)
                    << "\n";
            }
            out << "    return " << b << "\n}\n";
            break;
    }
    return out.str();
}

// Extreme units for the explicit (metrics) experiment.
inline std::string extreme_when(const std::string& name, int branches) {
    std::ostringstream out;
    out << "fun " << name << "(x: Int): Int = when (x) {\n";
    for (int i = 0; i < branches; ++i) out << "    " << i << " -> " << i * 2 << "\n";
    out << "    else -> 0\n}\n";
    return out.str();
}

inline std::string extreme_params(const std::string& name, int params) {
    std::ostringstream out;
    out << "fun " << name << "(";
    for (int i = 0; i < params; ++i) {
        out << (i > 0 ? ", " : "") << "p" << i << ": Int";
    }
    out << "): Int {\n    return p0";
    for (int i = 1; i < params; ++i) out << " + p" << i;
    out << "\n}\n";
    return out.str();
}

inline std::string extreme_nesting(const std::string& name, int depth) {
    std::ostringstream out;
    out << "fun " << name << "(x: Int): Int {\n";
    std::string pad = "    ";
    for (int i = 0; i < depth; ++i) {
        out << pad << "if (x > " << i << ") {\n";
        pad += "    ";
    }
    out << pad << "return " << depth << "\n";
    for (int i = depth - 1; i >= 0; --i) {
        pad = std::string(4 * (i + 1), ' ');
        out << pad << "}\n";
    }
    out << "    return 0\n}\n";
    return out.str();
}

inline std::string extreme_statements(const std::string& name, int statements) {
    std::ostringstream out;
    out << "fun " << name << "(x: Int): Int {\n    var acc = 0\n";
    for (int i = 0; i < statements; ++i) {
        out << "    acc += x * " << (i % 89 + 1) << "\n";
    }
    out << "    return acc\n}\n";
    return out.str();
}

inline std::string extreme_lambdas(const std::string& name, int lambdas) {
    std::ostringstream out;
    out << "fun " << name << "(xs: List<Int>): Int {\n    var acc = 0\n";
    for (int i = 0; i < lambdas; ++i) {
        out << "    acc += xs.fold(" << i << ") { a, b -> a + b }\n";
    }
    out << "    return acc\n}\n";
    return out.str();
}

// Structurally unique unit for the implicit (N-gram) experiment: stacks of
// throw/try/index/unary constructs no template produces, at high counts.
inline std::string structurally_unique(const std::string& name, int reps) {
    std::ostringstream out;
    out << "fun " << name << "(xs: Array<Int>): Int {\n";
    for (int i = 0; i < reps; ++i) {
        out << "    try {\n"
            << "        xs[xs[" << i % 7 << "]] -= -xs[" << i % 5 << "]\n"
            << "    } finally {\n"
            << "        xs[0] += 1\n"
            << "    }\n";
    }
    out << "    return xs[0]\n}\n";
    return out.str();
}

// Renders `count` template functions into a corpus, optionally appending
// planted sources, and returns the parsed function units (deduplicated).
inline astray::Corpus generate(int count, std::uint64_t seed,
                               const std::vector<std::string>& planted = {}) {
    std::mt19937_64 rng(seed);
    std::ostringstream source;
    for (int i = 0; i < count; ++i) {
        source << template_function(i, rng) << "\n";
    }
    astray::Corpus corpus;
    astray::SyntaxNode file = astray::parse_source(source.str());
    corpus.functions = astray::dedup_units(astray::extract_function_units(file, "generated.kt"));
    for (std::size_t p = 0; p < planted.size(); ++p) {
        astray::SyntaxNode planted_file = astray::parse_source(planted[p]);
        auto units = astray::extract_function_units(
            planted_file, "planted-" + std::to_string(p) + ".kt");
        for (auto& u : units) corpus.functions.push_back(std::move(u));
    }
    corpus.functions = astray::dedup_units(corpus.functions);
    corpus.manifest.function_count = corpus.functions.size();
    corpus.manifest.corpus_id = "generated-" + std::to_string(seed);
    return corpus;
}

}  // namespace corpus_gen
