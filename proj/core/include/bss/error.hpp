#pragma once

#include <stdexcept>
#include <string>

namespace bss {

/// Base of every error raised by the toolkit.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or semantically invalid input (bad schema, bad arguments).
class input_error : public error {
public:
  using error::error;
};

class schema_error : public input_error {
public:
  explicit schema_error(std::string column)
      : input_error("missing required column '" + column + "'"),
        column_{std::move(column)} {}

  std::string const& column() const noexcept { return column_; }

private:
  std::string column_;
};

class validation_error : public input_error {
public:
  using input_error::input_error;
};

class ordering_error : public input_error {
public:
  using input_error::input_error;
};

class lookup_error : public input_error {
public:
  using input_error::input_error;
};

/// A computation could not proceed on otherwise valid input.
class numeric_error : public error {
public:
  using error::error;
};

class rank_error : public numeric_error {
public:
  rank_error(int requested, int attainable)
      : numeric_error("requested " + std::to_string(requested) +
                      " components but the attainable maximum is " +
                      std::to_string(attainable)),
        attainable_{attainable} {}

  int attainable() const noexcept { return attainable_; }

private:
  int attainable_;
};

class convergence_error : public numeric_error {
public:
  explicit convergence_error(int component)
      : numeric_error("NIPALS did not converge for component " +
                      std::to_string(component)),
        component_{component} {}

  int component() const noexcept { return component_; }

private:
  int component_;
};

class degenerate_split_error : public numeric_error {
public:
  using numeric_error::numeric_error;
};

class alignment_error : public error {
public:
  using error::error;
};

/// A required artifact of an earlier pipeline stage is missing.
class missing_prerequisite : public error {
public:
  using error::error;
};

}  // namespace bss
