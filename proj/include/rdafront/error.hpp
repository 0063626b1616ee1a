#pragma once

#include <stdexcept>
#include <string>

namespace rdafront {

/// Failure categories raised across the pipeline. The CLI maps the stage of
/// an error (not its kind) onto a process exit code.
enum class ErrorKind {
  InvalidArgument,
  OutOfDomain,
  DegenerateReference,
  Syntax,
  UnknownIdentifier,
  UnboundVariable,
  Domain,
  Escape,
  BlowUp,
  Transversality,
  Coverage,
  DivisionHazard,
  ConditionViolated,
  FrontEscape,
  MultivaluedFront,
  DegenerateLayer,
  Projection,
  Existence,
  LayerAssembly,
  Divergence,
  Io,
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), kind_(kind), stage_(std::move(stage)), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// "module.operation" that raised the error, e.g. "characteristics.solve_on_grid".
  const std::string& stage() const noexcept { return stage_; }
  /// The message without the stage prefix.
  const std::string& detail() const noexcept { return detail_; }
  /// Message for re-raising under `stage`: the stage prefix is kept only when it differs.
  std::string relay(const std::string& stage) const { return stage == stage_ ? detail_ : what(); }

 private:
  ErrorKind kind_;
  std::string stage_;
  std::string detail_;
};

}  // namespace rdafront
