#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hirag {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (paths, thresholds, backend settings).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A corpus or profile record could not be ingested.
class IngestError : public Error {
public:
    IngestError(const std::string& what, std::size_t line)
        : Error(what), line_(line) {}

    /// 1-based line in the offending file, or 0 when not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An index file is missing, corrupt, or has an incompatible version.
class IndexError : public Error {
public:
    using Error::Error;
};

/// A remote call (LLM, embedder, search) failed in a way that may succeed on retry.
class TransportError : public Error {
public:
    using Error::Error;
};

/// A scripted backend had no completion left for a request. Always a test bug.
class ScriptError : public Error {
public:
    using Error::Error;
};

/// A dataset file could not be parsed under the requested format.
class DatasetError : public Error {
public:
    DatasetError(const std::string& what, std::size_t record)
        : Error(what), record_(record) {}

    /// 1-based line number (line formats) or 0-based record index (array formats).
    std::size_t record() const noexcept { return record_; }

private:
    std::size_t record_;
};

}  // namespace hirag
