#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>
#if __has_include(<umfpack.h>) || __has_include(<suitesparse/umfpack.h>)
#define ROUGHLAYER_HAVE_UMFPACK 1
#include <Eigen/UmfPackSupport>
#endif

namespace roughlayer {

struct TripletEntry {
    int row;
    int col;
    double value;
};

/// Compressed-sparse-row matrix assembled from (row, col, value) triplets;
/// duplicates are summed. Column indices per row are sorted and unique.
class SparseMatrix {
  public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(int rows, int cols,
                                      const std::vector<TripletEntry>& entries) {
        if (rows < 0 || cols < 0)
            throw std::invalid_argument("SparseMatrix: negative dimensions");
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(entries.size());
        for (const auto& e : entries) {
            if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
                throw std::out_of_range("SparseMatrix: triplet index out of range");
            trip.emplace_back(e.row, e.col, e.value);
        }
        SparseMatrix m;
        m.mat_.resize(rows, cols);
        m.mat_.setFromTriplets(trip.begin(), trip.end());
        m.mat_.prune(0.0, 0.0);
        m.mat_.makeCompressed();
        return m;
    }

    int rows() const { return static_cast<int>(mat_.rows()); }
    int cols() const { return static_cast<int>(mat_.cols()); }
    int nonzeros() const { return static_cast<int>(mat_.nonZeros()); }

    const int* row_offsets() const { return mat_.outerIndexPtr(); }
    const int* col_indices() const { return mat_.innerIndexPtr(); }
    const double* values() const { return mat_.valuePtr(); }

    std::vector<double> multiply(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != cols())
            throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
        Eigen::VectorXd yv = mat_ * xv;
        return {yv.data(), yv.data() + yv.size()};
    }

    const Eigen::SparseMatrix<double, Eigen::RowMajor>& eigen() const { return mat_; }

  private:
    Eigen::SparseMatrix<double, Eigen::RowMajor> mat_;
};

enum class SolveMethod { DirectLU, PreconditionedIterative };

/// Solves Ax = b. DirectLU guarantees residual <= 1e-10 * (|b| + 1);
/// the iterative path (ILU-preconditioned BiCGSTAB) honors tol.
inline std::vector<double> solve_sparse(const SparseMatrix& A, const std::vector<double>& b,
                                        SolveMethod method = SolveMethod::DirectLU,
                                        double tol = 1e-12) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("solve_sparse: system must be square");
    if (static_cast<int>(b.size()) != A.rows())
        throw std::invalid_argument("solve_sparse: rhs size mismatch");

    Eigen::Map<const Eigen::VectorXd> bv(b.data(), b.size());
    Eigen::VectorXd x;

    if (method == SolveMethod::DirectLU) {
        // direct factorizations need column-major storage
        Eigen::SparseMatrix<double> Ac = A.eigen();
#ifdef ROUGHLAYER_HAVE_UMFPACK
        Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(Ac);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error(
                "solve_sparse: LU factorization failed (singular or structurally "
                "deficient matrix)");
        x = lu.solve(bv);
#else
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(Ac);
        lu.factorize(Ac);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("solve_sparse: LU factorization failed (singular or "
                                     "structurally deficient matrix): " + lu.lastErrorMessage());
        x = lu.solve(bv);
#endif
    } else {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>,
                        Eigen::IncompleteLUT<double>> it;
        it.setTolerance(tol);
        it.setMaxIterations(4 * A.rows() + 200);
        it.compute(A.eigen());
        if (it.info() != Eigen::Success)
            throw std::runtime_error("solve_sparse: iterative preconditioner setup failed");
        x = it.solve(bv);
        if (it.info() != Eigen::Success)
            throw std::runtime_error("solve_sparse: iteration stagnated, residual " +
                                     std::to_string(it.error()));
    }

    const double resid = (A.eigen() * x - bv).norm();
    const double allowed = (method == SolveMethod::DirectLU) ? 1e-10 * (bv.norm() + 1.0)
                                                             : tol * (bv.norm() + 1.0) * 10.0;
    if (!(resid <= allowed))
        throw std::runtime_error("solve_sparse: residual " + std::to_string(resid) +
                                 " exceeds tolerance " + std::to_string(allowed));
    return {x.data(), x.data() + x.size()};
}

}  // namespace roughlayer
