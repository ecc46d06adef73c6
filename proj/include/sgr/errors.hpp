#pragma once

#include <stdexcept>
#include <string>

namespace sgr {

/// Base class for all engine errors. what() is always a single line of the
/// form "Kind: detail" so callers (and the CLI) can emit it verbatim.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct EmptyToken : Error {
    explicit EmptyToken(const std::string& detail) : Error("EmptyToken", detail) {}
};

struct ParseError : Error {
    ParseError(std::size_t line, const std::string& detail)
        : Error("ParseError", "line " + std::to_string(line) + ": " + detail), line(line) {}
    std::size_t line;
};

struct UnsupportedFormat : Error {
    explicit UnsupportedFormat(const std::string& detail) : Error("UnsupportedFormat", detail) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& detail) : Error("SchemaError", detail) {}
};

struct BadRotation : Error {
    explicit BadRotation(const std::string& detail) : Error("BadRotation", detail) {}
};

struct DuplicateId : Error {
    explicit DuplicateId(const std::string& detail) : Error("DuplicateId", detail) {}
};

struct BoxOutOfRange : Error {
    explicit BoxOutOfRange(const std::string& detail) : Error("BoxOutOfRange", detail) {}
};

struct MissingInput : Error {
    explicit MissingInput(const std::string& detail) : Error("MissingInput", detail) {}
};

struct EmptyAssociation : Error {
    explicit EmptyAssociation(const std::string& detail) : Error("EmptyAssociation", detail) {}
};

struct CoincidentPositions : Error {
    explicit CoincidentPositions(const std::string& detail) : Error("CoincidentPositions", detail) {}
};

struct UnknownNode : Error {
    explicit UnknownNode(int id) : Error("UnknownNode", "node " + std::to_string(id)) {}
};

/// Query-text parse failure; offset is the byte position of the offending token.
struct SyntaxError : Error {
    SyntaxError(std::size_t offset, const std::string& detail)
        : Error("SyntaxError", "offset " + std::to_string(offset) + ": " + detail), offset(offset) {}
    std::size_t offset;
};

struct UnknownAttributeWord : Error {
    UnknownAttributeWord(std::size_t offset, const std::string& word)
        : Error("UnknownAttributeWord", "\"" + word + "\" at offset " + std::to_string(offset)),
          offset(offset), word(word) {}
    std::size_t offset;
    std::string word;
};

struct PlacementFailure : Error {
    explicit PlacementFailure(const std::string& detail) : Error("PlacementFailure", detail) {}
};

} // namespace sgr
