#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zoi {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Out-of-range or non-finite numeric input (coordinates, angles, distances).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed JSON or XML text. offset is the byte position reported by the
// underlying parser, or npos when the parser only knows a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset = npos)
        : Error(what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t offset_;
};

// Well-formed payload whose structure does not match what the parser expects.
// field names the offending attribute or JSON member.
class SchemaError : public Error {
public:
    SchemaError(const std::string& field, const std::string& what)
        : Error(what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class StorageError : public Error {
public:
    using Error::Error;
};

// A document rejected by the store schema. path is dotted, e.g.
// "photo.geo.latitude".
class ValidationError : public Error {
public:
    ValidationError(const std::string& path, const std::string& what)
        : Error(what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class QueryError : public Error {
public:
    using Error::Error;
};

class EmptyCorpusError : public Error {
public:
    EmptyCorpusError() : Error("empty corpus: no records left after filtering") {}
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace zoi
