// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fclip {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedTemplateError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Raised by corpus loading; carries the id of the record that failed.
class LoadError : public Error {
 public:
  LoadError(std::string record_id, const std::string& what)
      : Error(record_id.empty() ? what : "record '" + record_id + "': " + what),
        record_id_(std::move(record_id)) {}

  const std::string& record_id() const noexcept { return record_id_; }

 private:
  std::string record_id_;
};

class CaptionParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during a training step. `component()` names the offending
// loss term ("l_p", "l_m", "l_ek" or "total").
class TrainingError : public Error {
 public:
  TrainingError(std::string component, const std::string& what)
      : Error(what), component_(std::move(component)) {}

  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

}  // namespace fclip
