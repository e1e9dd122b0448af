#pragma once

#include <stdexcept>
#include <string>

namespace tnet {

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or contract violation in a tensor/layer operation.
struct ShapeError : EngineError {
    using EngineError::EngineError;
};

// Architecture construction or validation failure.
struct BuildError : EngineError {
    using EngineError::EngineError;
};

// Descriptor text error; message carries the 1-based line number.
struct DescriptorError : BuildError {
    DescriptorError(int line, const std::string& what)
        : BuildError("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

// Dataset ingestion failure (bad image, unknown class, unreadable file).
struct DataError : EngineError {
    using EngineError::EngineError;
};

struct ModelFileError : EngineError {
    enum class Kind { bad_magic, bad_version, truncated, structure, io };
    ModelFileError(Kind kind, const std::string& what) : EngineError(what), kind(kind) {}
    Kind kind;
};

// Training produced a non-finite loss.
struct DivergenceError : EngineError {
    DivergenceError(int epoch, int batch)
        : EngineError("training diverged (non-finite loss) at epoch " + std::to_string(epoch) +
                      ", batch " + std::to_string(batch)),
          epoch(epoch), batch(batch) {}
    int epoch;
    int batch;
};

}  // namespace tnet
