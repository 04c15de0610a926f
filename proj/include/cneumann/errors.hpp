#pragma once

#include <stdexcept>
#include <string>

namespace cneumann {

// Base class of every error raised by the library. Each subclass maps to one
// documented failure mode so callers can catch selectively.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CNEUMANN_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

CNEUMANN_DEFINE_ERROR(NonConvexParameters);
CNEUMANN_DEFINE_ERROR(MeshFailure);
CNEUMANN_DEFINE_ERROR(SolverNoConvergence);
CNEUMANN_DEFINE_ERROR(MultipleEigenvalue);
CNEUMANN_DEFINE_ERROR(ClusterInconsistent);
CNEUMANN_DEFINE_ERROR(InfeasibleStart);
CNEUMANN_DEFINE_ERROR(EmptyFeasibleSet);
CNEUMANN_DEFINE_ERROR(DegenerateWeight);
CNEUMANN_DEFINE_ERROR(BracketFailure);
CNEUMANN_DEFINE_ERROR(InvalidPerturbation);
CNEUMANN_DEFINE_ERROR(ConfigError);

#undef CNEUMANN_DEFINE_ERROR

}  // namespace cneumann
