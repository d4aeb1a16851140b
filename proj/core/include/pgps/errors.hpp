#pragma once

#include <stdexcept>
#include <string>

namespace pgps {

/// Base class for all toolkit errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid schedule construction (divisibility, illegal patch, empty input).
class schedule_error : public error {
 public:
  using error::error;
};

/// Malformed volume / checkpoint file. Message names the byte offset.
class format_error : public error {
 public:
  using error::error;
};

/// Patch sampling contract violation (shape mismatch and friends).
class sampler_error : public error {
 public:
  using error::error;
};

/// Impossible synthetic-data geometry.
class generation_error : public error {
 public:
  using error::error;
};

/// Non-finite values encountered during training or inference.
class numeric_error : public error {
 public:
  using error::error;
};

/// Statistical test preconditions violated.
class stats_error : public error {
 public:
  using error::error;
};

/// Voxel/runtime accounting preconditions violated.
class accounting_error : public error {
 public:
  using error::error;
};

/// Broken call contract (out-of-range label, bad tensor shape).
class contract_error : public error {
 public:
  using error::error;
};

/// Invalid CLI or file configuration. Message names the offending field.
class config_error : public error {
 public:
  using error::error;
};

}  // namespace pgps
