#pragma once

#include <stdexcept>
#include <string>

namespace poselift {

// Domain errors. Each maps one failure mode of the pose pipeline to a
// distinct type so callers can catch what they can actually handle.

struct NonPositiveDepth : std::runtime_error {
  explicit NonPositiveDepth(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidCrop : std::runtime_error {
  explicit InvalidCrop(const std::string& what) : std::runtime_error(what) {}
};

struct FrameMismatch : std::runtime_error {
  explicit FrameMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct SchemaMismatch : std::runtime_error {
  explicit SchemaMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct GenerationExhausted : std::runtime_error {
  explicit GenerationExhausted(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyDataset : std::runtime_error {
  explicit EmptyDataset(const std::string& what) : std::runtime_error(what) {}
};

struct SingleClass : std::runtime_error {
  explicit SingleClass(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroHeadSegment : std::runtime_error {
  explicit ZeroHeadSegment(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateProjection : std::runtime_error {
  explicit DegenerateProjection(const std::string& what) : std::runtime_error(what) {}
};

struct NoValidDepth : std::runtime_error {
  explicit NoValidDepth(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyBBox : std::runtime_error {
  explicit EmptyBBox(const std::string& what) : std::runtime_error(what) {}
};

// Parse failures carry the 1-based line number of the offending input line.
struct ParseError : std::runtime_error {
  size_t line;
  ParseError(size_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace poselift
