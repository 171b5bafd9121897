#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pellip/prng.hpp"

namespace pellip {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixXd = Eigen::MatrixXd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;

/// A constant complex d x d coefficient matrix. Ellipticity means the
/// numerical-range lower bound lambda() is strictly positive; the operator
/// norm upper bound Lambda() is the spectral norm, the smallest admissible
/// choice.
class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(MatrixXcd m);

    int dim() const { return static_cast<int>(m_.rows()); }
    const MatrixXcd& entries() const { return m_; }

    /// min_{|xi|=1} Re<A xi, xi>.
    double lambda() const { return lambda_; }
    /// Spectral norm, so |<A xi, sigma>| <= Lambda |xi||sigma| is sharp.
    double Lambda() const { return Lambda_; }
    bool is_elliptic() const { return lambda_ > 0.0; }
    bool is_real() const;

    ComplexMatrix adjoint() const { return ComplexMatrix(m_.adjoint()); }
    ComplexMatrix conjugated() const { return ComplexMatrix(m_.conjugate()); }
    ComplexMatrix rotated(double phi) const {
        return ComplexMatrix(std::polar(1.0, phi) * m_);
    }

    static ComplexMatrix identity(int d) { return ComplexMatrix(MatrixXcd::Identity(d, d)); }
    static ComplexMatrix phase_identity(double phi, int d) {
        return ComplexMatrix(std::polar(1.0, phi) * MatrixXcd::Identity(d, d));
    }

  private:
    MatrixXcd m_;
    double lambda_ = 0.0;
    double Lambda_ = 0.0;
};

/// Real form of A: the 2d x 2d block matrix [[Re A, -Im A], [Im A, Re A]]
/// acting on R^{2d} identified with C^d, (x, y) <-> x + iy.
MatrixXd real_form(const MatrixXcd& a);
inline MatrixXd real_form(const ComplexMatrix& a) { return real_form(a.entries()); }

/// Real form of multiplication by i: the symplectic block [[0, -I], [I, 0]].
MatrixXd symplectic_form(int d);

/// Real form of complex conjugation: diag(I_d, -I_d).
MatrixXd conjugation_form(int d);

/// C^d vector <-> R^{2d} stacking (Re, Im).
VectorXd split_real(const VectorXcd& xi);
VectorXcd merge_complex(const VectorXd& x);

struct PRange {
    double p_minus = 1.0;
    double p_plus = 0.0;
    bool unbounded = false;
};

/// Result of a p-ellipticity computation: the sharp constant, a unit
/// minimizer of the underlying quadratic form on R^{2d}, and (when computed)
/// the open interval of exponents where the constant stays positive.
struct PEllipticityReport {
    double p = 0.0;
    double delta = 0.0;
    VectorXd minimizer;            // unit vector in R^{2d}
    int attaining_cell = -1;       // for fields: index of the minimizing cell
    std::optional<PRange> p_range;
};

/// Symmetrized 2d x 2d matrix of the quadratic form
///   X -> <M(A) X, (I + (1 - 2/p) C) X>,  C = conjugation_form(d),
/// whose smallest eigenvalue is the p-ellipticity constant of A.
MatrixXd p_form_matrix(const ComplexMatrix& a, double p);

/// The p-ellipticity constant of a single matrix: the exact minimum over
/// unit xi in C^d of Re<A xi, xi + (1 - 2/p) conj(xi)>, computed by
/// symmetric-eigenvalue reduction. Requires p > 1.
PEllipticityReport delta_p(const ComplexMatrix& a, double p);

/// Plain value without the eigenvector bookkeeping.
double delta_p_value(const ComplexMatrix& a, double p);

/// Piecewise-constant coefficient field: one matrix per grid cell. The
/// essential infimum over the domain is the minimum over cells.
class ComplexMatrixField {
  public:
    ComplexMatrixField() = default;
    explicit ComplexMatrixField(std::vector<ComplexMatrix> cells);
    static ComplexMatrixField constant(ComplexMatrix a, int n_cells);

    int dim() const { return cells_.empty() ? 0 : cells_[0].dim(); }
    int size() const { return static_cast<int>(cells_.size()); }
    const ComplexMatrix& cell(int i) const { return cells_[static_cast<size_t>(i)]; }
    const std::vector<ComplexMatrix>& cells() const { return cells_; }

    double lambda() const { return lambda_; }
    double Lambda() const { return Lambda_; }
    bool is_real() const;

    ComplexMatrixField adjoint() const;
    ComplexMatrixField rotated(double phi) const;

  private:
    std::vector<ComplexMatrix> cells_;
    double lambda_ = 0.0;
    double Lambda_ = 0.0;
};

/// Joint constants of a pair of fields.
double delta_p_value(const ComplexMatrixField& a, double p);
PEllipticityReport delta_p_field(const ComplexMatrixField& a, double p);

struct PairConstants {
    double delta_p = 0.0;  // min of the two field constants
    double lambda = 0.0;   // min of the two lower bounds
    double Lambda = 0.0;   // max of the two norm bounds
};
PairConstants pair_constants(const ComplexMatrixField& a, const ComplexMatrixField& b, double p);

inline double delta_p_pair(const ComplexMatrixField& a, const ComplexMatrixField& b, double p) {
    return std::min(delta_p_value(a, p), delta_p_value(b, p));
}

constexpr double kPMax = 1e6;        // exponent cap; ranges beyond report unbounded
constexpr double kPBisectTol = 1e-9;
constexpr double kThetaBisectTol = 1e-8;

/// Open interval (p-, p+) on which the field stays p-elliptic. Requires
/// delta_2 > 0. p+ is located by monotone bisection on [2, kPMax] and
/// p- = p+/(p+ - 1); a constant positive up to kPMax is reported unbounded.
PRange p_ellipticity_range(const ComplexMatrixField& a);

/// Supremum of angles theta with min(delta_p(e^{i theta} A),
/// delta_p(e^{-i theta} A)) > 0, located to kThetaBisectTol. Requires
/// delta_p(A) > 0.
double analyticity_angle(const ComplexMatrixField& a, double p);

/// Seeded random elliptic matrix: lambda(A) > 0 is enforced by construction
/// (shift by a multiple of the identity) and the result is rescaled to keep
/// Lambda moderate.
ComplexMatrix random_elliptic(Rng& rng, int d, double min_lambda = 0.05);

}  // namespace pellip
