#include "pellip/algebra.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace pellip {

ComplexMatrix::ComplexMatrix(MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        throw std::invalid_argument("ComplexMatrix: square matrix required");
    const MatrixXcd herm = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    lambda_ = es.eigenvalues().minCoeff();
    Eigen::JacobiSVD<MatrixXcd> svd(m_);
    Lambda_ = svd.singularValues().maxCoeff();
}

bool ComplexMatrix::is_real() const {
    return m_.imag().cwiseAbs().maxCoeff() == 0.0;
}

MatrixXd real_form(const MatrixXcd& a) {
    const int d = static_cast<int>(a.rows());
    MatrixXd m(2 * d, 2 * d);
    m.topLeftCorner(d, d) = a.real();
    m.topRightCorner(d, d) = -a.imag();
    m.bottomLeftCorner(d, d) = a.imag();
    m.bottomRightCorner(d, d) = a.real();
    return m;
}

MatrixXd symplectic_form(int d) {
    MatrixXd j = MatrixXd::Zero(2 * d, 2 * d);
    j.topRightCorner(d, d) = -MatrixXd::Identity(d, d);
    j.bottomLeftCorner(d, d) = MatrixXd::Identity(d, d);
    return j;
}

MatrixXd conjugation_form(int d) {
    MatrixXd c = MatrixXd::Identity(2 * d, 2 * d);
    c.bottomRightCorner(d, d) *= -1.0;
    return c;
}

VectorXd split_real(const VectorXcd& xi) {
    const int d = static_cast<int>(xi.size());
    VectorXd x(2 * d);
    x.head(d) = xi.real();
    x.tail(d) = xi.imag();
    return x;
}

VectorXcd merge_complex(const VectorXd& x) {
    const int d = static_cast<int>(x.size()) / 2;
    VectorXcd xi(d);
    for (int i = 0; i < d; ++i) xi(i) = Complex(x(i), x(d + i));
    return xi;
}

MatrixXd p_form_matrix(const ComplexMatrix& a, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("p_form_matrix: requires p > 1");
    const int d = a.dim();
    const double c = 1.0 - 2.0 / p;
    MatrixXd n = MatrixXd::Identity(2 * d, 2 * d);
    n.topLeftCorner(d, d) *= (1.0 + c);
    n.bottomRightCorner(d, d) *= (1.0 - c);
    const MatrixXd nm = n * real_form(a);
    return 0.5 * (nm + nm.transpose());
}

PEllipticityReport delta_p(const ComplexMatrix& a, double p) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p_form_matrix(a, p));
    PEllipticityReport rep;
    rep.p = p;
    rep.delta = es.eigenvalues()(0);
    rep.minimizer = es.eigenvectors().col(0);
    return rep;
}

double delta_p_value(const ComplexMatrix& a, double p) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p_form_matrix(a, p), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

ComplexMatrixField::ComplexMatrixField(std::vector<ComplexMatrix> cells) : cells_(std::move(cells)) {
    if (cells_.empty()) throw std::invalid_argument("ComplexMatrixField: empty field");
    const int d = cells_[0].dim();
    lambda_ = cells_[0].lambda();
    Lambda_ = cells_[0].Lambda();
    for (const auto& c : cells_) {
        if (c.dim() != d) throw std::invalid_argument("ComplexMatrixField: mixed dimensions");
        lambda_ = std::min(lambda_, c.lambda());
        Lambda_ = std::max(Lambda_, c.Lambda());
    }
}

ComplexMatrixField ComplexMatrixField::constant(ComplexMatrix a, int n_cells) {
    return ComplexMatrixField(std::vector<ComplexMatrix>(static_cast<size_t>(n_cells), std::move(a)));
}

bool ComplexMatrixField::is_real() const {
    return std::all_of(cells_.begin(), cells_.end(), [](const ComplexMatrix& c) { return c.is_real(); });
}

ComplexMatrixField ComplexMatrixField::adjoint() const {
    std::vector<ComplexMatrix> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(c.adjoint());
    return ComplexMatrixField(std::move(out));
}

ComplexMatrixField ComplexMatrixField::rotated(double phi) const {
    std::vector<ComplexMatrix> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(c.rotated(phi));
    return ComplexMatrixField(std::move(out));
}

double delta_p_value(const ComplexMatrixField& a, double p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : a.cells()) best = std::min(best, delta_p_value(c, p));
    return best;
}

PEllipticityReport delta_p_field(const ComplexMatrixField& a, double p) {
    if (a.size() == 0) throw std::invalid_argument("delta_p_field: empty field");
    PEllipticityReport best;
    best.delta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.size(); ++i) {
        PEllipticityReport rep = delta_p(a.cell(i), p);
        if (rep.delta < best.delta) {
            best = rep;
            best.attaining_cell = i;
        }
    }
    return best;
}

PairConstants pair_constants(const ComplexMatrixField& a, const ComplexMatrixField& b, double p) {
    PairConstants c;
    c.delta_p = std::min(delta_p_value(a, p), delta_p_value(b, p));
    c.lambda = std::min(a.lambda(), b.lambda());
    c.Lambda = std::max(a.Lambda(), b.Lambda());
    return c;
}

PRange p_ellipticity_range(const ComplexMatrixField& a) {
    // Degenerate inputs (delta_2 at roundoff scale) have no meaningful range.
    if (!(delta_p_value(a, 2.0) > 1e-14 * std::max(1.0, a.Lambda())))
        throw std::invalid_argument("p_ellipticity_range: field is not elliptic (delta_2 <= 0)");
    PRange r;
    if (delta_p_value(a, kPMax) > 0.0) {
        r.p_minus = 1.0;
        r.p_plus = std::numeric_limits<double>::infinity();
        r.unbounded = true;
        return r;
    }
    // delta_p is nonincreasing on [2, inf): bisect the sign change.
    double lo = 2.0, hi = kPMax;
    while (hi - lo > kPBisectTol) {
        const double mid = 0.5 * (lo + hi);
        (delta_p_value(a, mid) > 0.0 ? lo : hi) = mid;
    }
    r.p_plus = 0.5 * (lo + hi);
    r.p_minus = r.p_plus / (r.p_plus - 1.0);
    return r;
}

double analyticity_angle(const ComplexMatrixField& a, double p) {
    if (!(delta_p_value(a, p) > 0.0))
        throw std::invalid_argument("analyticity_angle: requires delta_p(A) > 0");
    const auto positive = [&](double theta) {
        return std::min(delta_p_value(a.rotated(theta), p), delta_p_value(a.rotated(-theta), p)) > 0.0;
    };
    // Coarse scan first: the constant is Lipschitz in the angle but not
    // necessarily monotone, so bracket the last positive point before
    // bisecting.
    const int n_scan = 128;
    const double theta_max = 1.5707963267948966;
    double lo = 0.0, hi = theta_max;
    for (int k = n_scan; k >= 1; --k) {
        const double theta = theta_max * k / (n_scan + 1);
        if (positive(theta)) {
            lo = theta;
            hi = theta_max * (k + 1) / (n_scan + 1);
            break;
        }
    }
    while (hi - lo > kThetaBisectTol) {
        const double mid = 0.5 * (lo + hi);
        (positive(mid) ? lo : hi) = mid;
    }
    return lo;
}

ComplexMatrix random_elliptic(Rng& rng, int d, double min_lambda) {
    MatrixXcd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
    m *= 0.5;
    // Shift until the numerical range clears min_lambda, then normalize the
    // scale so Lambda stays O(1) across samples.
    ComplexMatrix probe(m);
    if (probe.lambda() < min_lambda)
        probe = ComplexMatrix(m + (min_lambda - probe.lambda()) * MatrixXcd::Identity(d, d));
    return ComplexMatrix(probe.entries() / std::max(1.0, probe.Lambda() / 4.0));
}

}  // namespace pellip
