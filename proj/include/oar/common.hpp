#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace oar {

using cplx = std::complex<double>;

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

using Mat2c = Mat2<cplx>;
using MatXc = Eigen::MatrixXcd;
using VecXc = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;

// Single error type; `what()` carries the reason, `kind` lets callers branch.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    invalid_argument,
    degenerate_model,
    quadrature,
    tail_mass,
    inadmissible_filter,
    size_guard,
    antisymmetry,
  };

  Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Thrown when the doubling test fails; keeps both estimates.
class QuadratureError : public Error {
 public:
  QuadratureError(cplx coarse, cplx fine, const std::string& hint)
      : Error(Kind::quadrature, "quadrature did not converge: coarse=" + fmt(coarse) +
                                     " fine=" + fmt(fine) + (hint.empty() ? "" : " (" + hint + ")")),
        coarse_(coarse),
        fine_(fine) {}

  cplx coarse() const { return coarse_; }
  cplx fine() const { return fine_; }

 private:
  static std::string fmt(cplx z) {
    return "(" + std::to_string(z.real()) + "," + std::to_string(z.imag()) + ")";
  }
  cplx coarse_, fine_;
};

inline double sign(double x) { return (x > 0) - (x < 0); }

}  // namespace oar
