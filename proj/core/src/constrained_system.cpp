#include "pneutop/constrained_system.hpp"

#include "pneutop/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pneutop {

ConstrainedSystem::ConstrainedSystem(int num_dofs, int dofs_per_element, std::vector<int> element_dofs,
                                     std::vector<int> fixed_dofs, std::string label)
    : num_dofs_(num_dofs),
      dofs_per_element_(dofs_per_element),
      num_elements_(static_cast<int>(element_dofs.size()) / dofs_per_element),
      element_dofs_(std::move(element_dofs)),
      fixed_dofs_(std::move(fixed_dofs)),
      label_(std::move(label))
{
    std::sort(fixed_dofs_.begin(), fixed_dofs_.end());
    fixed_dofs_.erase(std::unique(fixed_dofs_.begin(), fixed_dofs_.end()), fixed_dofs_.end());

    free_index_.assign(static_cast<std::size_t>(num_dofs_), 0);
    for (int d : fixed_dofs_) free_index_[static_cast<std::size_t>(d)] = -1;
    for (int d = 0; d < num_dofs_; ++d) {
        if (free_index_[static_cast<std::size_t>(d)] < 0) continue;
        free_index_[static_cast<std::size_t>(d)] = static_cast<int>(free_dofs_.size());
        free_dofs_.push_back(d);
    }

    const int nf = num_free();
    std::vector<Eigen::Triplet<double>> pattern;
    pattern.reserve(element_dofs_.size() * static_cast<std::size_t>(dofs_per_element_) + free_dofs_.size());
    for (int e = 0; e < num_elements_; ++e) {
        const auto dofs = this->element_dofs(e);
        for (int i : dofs) {
            const int fi = free_index_[static_cast<std::size_t>(i)];
            if (fi < 0) continue;
            for (int j : dofs) {
                const int fj = free_index_[static_cast<std::size_t>(j)];
                if (fj >= 0) pattern.emplace_back(fi, fj, 0.0);
            }
        }
    }
    for (int f = 0; f < nf; ++f) pattern.emplace_back(f, f, 0.0);
    reduced_.resize(nf, nf);
    reduced_.setFromTriplets(pattern.begin(), pattern.end());
    reduced_.makeCompressed();

    auto slot = [&](int fi, int fj) {
        const int* begin = reduced_.innerIndexPtr() + reduced_.outerIndexPtr()[fj];
        const int* end = reduced_.innerIndexPtr() + reduced_.outerIndexPtr()[fj + 1];
        const int* it = std::lower_bound(begin, end, fi);
        return static_cast<int>(it - reduced_.innerIndexPtr());
    };

    const auto n_local = static_cast<std::size_t>(dofs_per_element_);
    scatter_.assign(static_cast<std::size_t>(num_elements_) * n_local * n_local, -1);
    for (int e = 0; e < num_elements_; ++e) {
        const auto dofs = this->element_dofs(e);
        for (std::size_t i = 0; i < n_local; ++i) {
            const int fi = free_index_[static_cast<std::size_t>(dofs[i])];
            if (fi < 0) continue;
            for (std::size_t j = 0; j < n_local; ++j) {
                const int fj = free_index_[static_cast<std::size_t>(dofs[j])];
                if (fj < 0) continue;
                scatter_[(static_cast<std::size_t>(e) * n_local + i) * n_local + j] = slot(fi, fj);
            }
        }
    }
}

void ConstrainedSystem::set_point_stiffness(int dof, double value)
{
    if (dof < 0 || dof >= num_dofs_) throw ShapeError(label_ + ": point term dof out of range");
    for (auto& [d, v] : point_terms_)
        if (d == dof) {
            v = value;
            return;
        }
    point_terms_.emplace_back(dof, value);
}

void ConstrainedSystem::assemble(std::span<const double> a, const Matrix& ref_a, std::span<const double> b,
                                 const Matrix& ref_b)
{
    if (static_cast<int>(a.size()) != num_elements_ ||
        (!b.empty() && static_cast<int>(b.size()) != num_elements_))
        throw ShapeError(label_ + ": coefficient field length does not match element count");
    if (ref_a.rows() != dofs_per_element_ || ref_a.cols() != dofs_per_element_ ||
        (!b.empty() && (ref_b.rows() != dofs_per_element_ || ref_b.cols() != dofs_per_element_)))
        throw ShapeError(label_ + ": reference matrix has the wrong size");

    coef_a_.assign(a.begin(), a.end());
    coef_b_.assign(b.begin(), b.end());
    ref_a_ = ref_a;
    ref_b_ = b.empty() ? Matrix() : ref_b;

    double* values = reduced_.valuePtr();
    std::fill(values, values + reduced_.nonZeros(), 0.0);
    const auto n_local = static_cast<std::size_t>(dofs_per_element_);
    for (int e = 0; e < num_elements_; ++e) {
        const double ca = coef_a_[static_cast<std::size_t>(e)];
        const double cb = coef_b_.empty() ? 0.0 : coef_b_[static_cast<std::size_t>(e)];
        const int* s = scatter_.data() + static_cast<std::size_t>(e) * n_local * n_local;
        for (std::size_t i = 0; i < n_local; ++i)
            for (std::size_t j = 0; j < n_local; ++j) {
                const int pos = s[i * n_local + j];
                if (pos < 0) continue;
                double v = ca * ref_a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (!coef_b_.empty())
                    v += cb * ref_b_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                values[pos] += v;
            }
    }
    for (const auto& [dof, v] : point_terms_) {
        const int f = free_index_[static_cast<std::size_t>(dof)];
        if (f < 0) continue;
        reduced_.coeffRef(f, f) += v;
    }
    factorized_ = false;
}

void ConstrainedSystem::factorize()
{
    if (num_free() == 0) {
        factorized_ = true;
        return;
    }
    if (!analyzed_) {
        solver_.analyzePattern(reduced_);
        analyzed_ = true;
    }
    solver_.factorize(reduced_);
    if (solver_.info() != Eigen::Success)
        throw SolverError(label_ + ": sparse LDL^T factorization failed (" + std::to_string(num_free()) +
                          " free dofs)");
    const Vector d = solver_.vectorD();
    const double dmin = d.minCoeff(), dmax = d.maxCoeff();
    if (!(dmin > 0.0) || !(dmin > 1e-300 * dmax) || !std::isfinite(dmax))
        throw SolverError(label_ + ": matrix is not positive definite after Dirichlet elimination "
                                   "(pivot range [" +
                          std::to_string(dmin) + ", " + std::to_string(dmax) + "])");
    factorized_ = true;
}

Vector ConstrainedSystem::solve(const Vector& rhs, const Vector& prescribed) const
{
    if (!factorized_) throw StateError(label_ + ": solve called before factorize");
    if (rhs.size() != num_dofs_ || prescribed.size() != num_dofs_)
        throw ShapeError(label_ + ": solve vectors must have one entry per dof");

    Vector reduced_rhs(num_free());
    for (int f = 0; f < num_free(); ++f) reduced_rhs[f] = rhs[free_dofs_[static_cast<std::size_t>(f)]];

    const auto n_local = static_cast<std::size_t>(dofs_per_element_);
    for (int e = 0; e < num_elements_; ++e) {
        const auto dofs = element_dofs(e);
        bool lifted = false;
        for (int d : dofs)
            if (is_fixed(d) && prescribed[d] != 0.0) lifted = true;
        if (!lifted) continue;
        const double ca = coef_a_[static_cast<std::size_t>(e)];
        const double cb = coef_b_.empty() ? 0.0 : coef_b_[static_cast<std::size_t>(e)];
        for (std::size_t i = 0; i < n_local; ++i) {
            const int fi = free_index_[static_cast<std::size_t>(dofs[i])];
            if (fi < 0) continue;
            for (std::size_t j = 0; j < n_local; ++j) {
                if (!is_fixed(dofs[j])) continue;
                double kij = ca * ref_a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (!coef_b_.empty())
                    kij += cb * ref_b_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                reduced_rhs[fi] -= kij * prescribed[dofs[j]];
            }
        }
    }

    Vector x = prescribed;
    for (int d : free_dofs_) x[d] = 0.0;
    if (num_free() == 0) return x;
    const Vector xf = solver_.solve(reduced_rhs);
    if (!xf.allFinite()) throw SolverError(label_ + ": solution contains non-finite values");
    for (int f = 0; f < num_free(); ++f) x[free_dofs_[static_cast<std::size_t>(f)]] = xf[f];
    return x;
}

Vector ConstrainedSystem::solve_homogeneous(const Vector& rhs) const
{
    return solve(rhs, Vector::Zero(num_dofs_));
}

void ConstrainedSystem::element_product(int e, const Vector& u, std::span<double> out) const
{
    const auto dofs = element_dofs(e);
    const double ca = coef_a_[static_cast<std::size_t>(e)];
    const double cb = coef_b_.empty() ? 0.0 : coef_b_[static_cast<std::size_t>(e)];
    for (int i = 0; i < dofs_per_element_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dofs_per_element_; ++j) {
            double kij = ca * ref_a_(i, j);
            if (!coef_b_.empty()) kij += cb * ref_b_(i, j);
            s += kij * u[dofs[static_cast<std::size_t>(j)]];
        }
        out[static_cast<std::size_t>(i)] = s;
    }
}

Vector ConstrainedSystem::multiply(const Vector& u) const
{
    if (coef_a_.empty()) throw StateError(label_ + ": multiply called before assemble");
    Vector y = Vector::Zero(num_dofs_);
    std::vector<double> local(static_cast<std::size_t>(dofs_per_element_));
    for (int e = 0; e < num_elements_; ++e) {
        element_product(e, u, local);
        const auto dofs = element_dofs(e);
        for (std::size_t i = 0; i < local.size(); ++i) y[dofs[i]] += local[i];
    }
    for (const auto& [dof, v] : point_terms_) y[dof] += v * u[dof];
    return y;
}

SparseMatrix ConstrainedSystem::full_matrix() const
{
    if (coef_a_.empty()) throw StateError(label_ + ": full_matrix called before assemble");
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(num_elements_) * static_cast<std::size_t>(dofs_per_element_ * dofs_per_element_));
    for (int e = 0; e < num_elements_; ++e) {
        const auto dofs = element_dofs(e);
        const double ca = coef_a_[static_cast<std::size_t>(e)];
        const double cb = coef_b_.empty() ? 0.0 : coef_b_[static_cast<std::size_t>(e)];
        for (int i = 0; i < dofs_per_element_; ++i)
            for (int j = 0; j < dofs_per_element_; ++j) {
                double kij = ca * ref_a_(i, j);
                if (!coef_b_.empty()) kij += cb * ref_b_(i, j);
                t.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], kij);
            }
    }
    for (const auto& [dof, v] : point_terms_) t.emplace_back(dof, dof, v);
    SparseMatrix m(num_dofs_, num_dofs_);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

} // namespace pneutop
