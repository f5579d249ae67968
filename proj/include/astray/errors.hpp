#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace astray {

// Base class for all toolkit errors. CLI maps these to exit code 1
// (stage failure) unless they derive from ConfigError (exit code 2).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// --- lexing / parsing ---

class LexError : public Error {
public:
    LexError(const std::string& what, int line, int column)
        : Error(what + " at " + std::to_string(line) + ":" + std::to_string(column)),
          line(line), column(column) {}
    int line;
    int column;
};

class UnterminatedString : public LexError {
public:
    UnterminatedString(int line, int column)
        : LexError("unterminated string literal", line, column) {}
};

class IllegalCharacter : public LexError {
public:
    IllegalCharacter(const std::string& what, int line, int column)
        : LexError(what, line, column) {}
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, int line, int column,
                std::vector<std::string> expected = {})
        : Error(what + " at " + std::to_string(line) + ":" + std::to_string(column)),
          line(line), column(column), expected(std::move(expected)) {}
    int line;
    int column;
    std::vector<std::string> expected;
};

// --- corpus ---

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t record)
        : Error(what + " (record " + std::to_string(record) + ")"), record(record) {}
    std::size_t record;
};

// --- features ---

class EmptyVocabulary : public Error {
public:
    using Error::Error;
};

class EmptySequence : public Error {
public:
    using Error::Error;
};

// --- preprocess ---

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateCovariance : public Error {
public:
    using Error::Error;
};

// --- detect ---

class TooFewPoints : public Error {
public:
    using Error::Error;
};

class DegenerateData : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

// --- report ---

class EmptyCorpus : public Error {
public:
    using Error::Error;
};

class UnknownTag : public Error {
public:
    using Error::Error;
};

}  // namespace astray
