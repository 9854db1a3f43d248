#include "kinemesh/common/error.h"

namespace kinemesh {

FormatError::FormatError(const std::string& message, size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

EmbeddingError::EmbeddingError(const std::string& message, size_t joint)
    : Error(message), joint_(joint) {}

} // namespace kinemesh
