#pragma once

#include <stdexcept>
#include <string>

namespace bugloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingRoot : public Error {
public:
    explicit MissingRoot(const std::string& root)
        : Error("repository root does not exist or is not a directory: " + root) {}
};

class EmptyCorpus : public Error {
public:
    EmptyCorpus() : Error("empty corpus: no indexable files") {}
};

class UnknownDoc : public Error {
public:
    explicit UnknownDoc(std::size_t id) : Error("unknown document id " + std::to_string(id)) {}
};

/// Malformed model output or malformed input file.
class FormatError : public Error {
public:
    using Error::Error;
};

class BackendUnreachable : public Error {
public:
    using Error::Error;
};

class ScriptExhausted : public Error {
public:
    ScriptExhausted() : Error("scripted backend exhausted") {}
};

/// A scripted reply was bound to a prompt substring that the request did not contain.
class MatcherViolation : public Error {
public:
    using Error::Error;
};

class MismatchedTaskSets : public Error {
public:
    using Error::Error;
};

class EmptyRelevant : public Error {
public:
    EmptyRelevant() : Error("relevant set is empty") {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace bugloc
