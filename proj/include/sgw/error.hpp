#pragma once

#include <stdexcept>
#include <string>

namespace sgw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SceneGenerationError : public Error { using Error::Error; };
class FeatureExtractionError : public Error { using Error::Error; };
class LearningError : public Error { using Error::Error; };
class EmptyDensityError : public Error { using Error::Error; };
class NoGraspError : public Error { using Error::Error; };
class SolverError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };

class PlanningError : public Error {
 public:
  PlanningError(const std::string& what, int waypoint) : Error(what), waypoint_(waypoint) {}
  int waypoint() const { return waypoint_; }

 private:
  int waypoint_;
};

}  // namespace sgw
