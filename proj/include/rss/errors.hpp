#pragma once

#include <stdexcept>
#include <string>

namespace rss {

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can map the concrete type to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, const std::string& what)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + what),
        line(line),
        col(col) {}
  int line;
  int col;
};

class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string kind, int row, int col)
      : Error("layout invariant violated (" + kind + ") at cell (" + std::to_string(row) + "," +
              std::to_string(col) + ")"),
        kind(std::move(kind)),
        row(row),
        col(col) {}
  std::string kind;
  int row;
  int col;
};

class UnreachableElement : public Error {
 public:
  explicit UnreachableElement(const std::string& id) : Error("no valid neighbor for " + id), id(id) {}
  std::string id;
};

class PlacementInfeasible : public Error {
 public:
  using Error::Error;
};

class DisconnectedCommodity : public Error {
 public:
  DisconnectedCommodity(bool forward, int dropoff)
      : Error(std::string(forward ? "forward" : "backward") + " commodity for drop-off D" +
              std::to_string(dropoff) + " is disconnected"),
        forward(forward),
        dropoff(dropoff) {}
  bool forward;
  int dropoff;
};

class InvalidDemand : public Error {
 public:
  using Error::Error;
};

class SaturatedWorkstation : public Error {
 public:
  SaturatedWorkstation(int workstation, double utilization)
      : Error("workstation W" + std::to_string(workstation) + " saturated (utilization " +
              std::to_string(utilization) + ")"),
        workstation(workstation),
        utilization(utilization) {}
  int workstation;
  double utilization;
};

class InfeasibleDemand : public Error {
 public:
  using Error::Error;
};

class StrandedWalk : public Error {
 public:
  explicit StrandedWalk(int node) : Error("flow walk stranded at node " + std::to_string(node)), node(node) {}
  int node;
};

class MissingDirection : public Error {
 public:
  MissingDirection(int dropoff, bool forward)
      : Error("no " + std::string(forward ? "forward" : "backward") + " path for drop-off D" +
              std::to_string(dropoff)),
        dropoff(dropoff),
        forward(forward) {}
  int dropoff;
  bool forward;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed solution, trace, path-flow, metrics or heatmap file.
class FormatError : public Error {
 public:
  FormatError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line(line) {}
  int line;
};

class NoPathWithinHorizon : public Error {
 public:
  using Error::Error;
};

}  // namespace rss
