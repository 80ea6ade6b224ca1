#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace perturba {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define PERTURBA_DEFINE_ERROR(Name)                                            \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string &what) : Error(#Name ": " + what) {}       \
  }

PERTURBA_DEFINE_ERROR(ShapeMismatch);
PERTURBA_DEFINE_ERROR(NumericRankAmbiguity);
PERTURBA_DEFINE_ERROR(InvariantViolation);
PERTURBA_DEFINE_ERROR(PreconditionViolation);
PERTURBA_DEFINE_ERROR(NotContractible);
PERTURBA_DEFINE_ERROR(CohomologyNonzero);
PERTURBA_DEFINE_ERROR(Divergence);
PERTURBA_DEFINE_ERROR(ToleranceMiss);
PERTURBA_DEFINE_ERROR(AxiomViolation);
PERTURBA_DEFINE_ERROR(NotClosed);
PERTURBA_DEFINE_ERROR(Singular);
PERTURBA_DEFINE_ERROR(NoConvergence);
PERTURBA_DEFINE_ERROR(ArityViolation);
PERTURBA_DEFINE_ERROR(DomainViolation);
PERTURBA_DEFINE_ERROR(SplittingInvalid);
PERTURBA_DEFINE_ERROR(ObstructionNonzero);
PERTURBA_DEFINE_ERROR(SchemaError);

#undef PERTURBA_DEFINE_ERROR

/// Raised when 1 - delta*h cannot be certified invertible. `radius` carries
/// the largest parameter value at which certification succeeded, when the
/// caller searched for one (negative when not applicable).
class NotSmall : public Error {
public:
  explicit NotSmall(const std::string &what, double radius = -1.0)
      : Error("NotSmall: " + what), radius_(radius) {}
  double radius() const noexcept { return radius_; }

private:
  double radius_;
};

/// One of the perturbation-lemma relations failed; carries its label and degree.
class RelationViolation : public Error {
public:
  RelationViolation(std::string relation, int degree, const std::string &what)
      : Error("RelationViolation: " + relation + " at degree " +
              std::to_string(degree) + ": " + what),
        relation_(std::move(relation)), degree_(degree) {}
  const std::string &relation() const noexcept { return relation_; }
  int degree() const noexcept { return degree_; }

private:
  std::string relation_;
  int degree_;
};

/// A trivialization finished but the isomorphism defect exceeded tolerance
/// somewhere on the grid; carries the whole profile.
class DefectExceeded : public Error {
public:
  DefectExceeded(const std::string &what, std::vector<double> grid, std::vector<double> defects)
      : Error("DefectExceeded: " + what), grid_(std::move(grid)), defects_(std::move(defects)) {}
  const std::vector<double> &grid() const noexcept { return grid_; }
  const std::vector<double> &defects() const noexcept { return defects_; }

private:
  std::vector<double> grid_;
  std::vector<double> defects_;
};

} // namespace perturba
