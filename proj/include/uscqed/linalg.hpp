#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <lapacke.h>

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace uscqed {

using cplx = std::complex<double>;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

template <class Mat>
struct EigenPairs {
    RVec values;   // ascending
    Mat vectors;   // columns, empty when values only were requested
};

namespace detail {

inline void lapack_check(lapack_int info, const char* routine) {
    if (info != 0)
        throw std::runtime_error(std::string(routine) + " failed with info=" + std::to_string(info));
}

}  // namespace detail

// Lowest k eigenpairs of a real symmetric matrix (k<0: all).
inline EigenPairs<RMat> eigh(const RMat& A, int k = -1, bool vectors = true) {
    const lapack_int n = static_cast<lapack_int>(A.rows());
    if (A.cols() != A.rows()) throw std::invalid_argument("eigh: matrix not square");
    if (k < 0 || k > n) k = static_cast<int>(n);
    EigenPairs<RMat> out;
    if (n == 0 || k == 0) return out;
    RMat work = A;
    RVec w(n);
    RMat z;
    if (vectors) z.resize(n, k);
    std::vector<lapack_int> isuppz(2 * std::max<lapack_int>(1, n));
    lapack_int m = 0;
    const char range = (k == n) ? 'A' : 'I';
    lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', range, 'U', n, work.data(), n,
                                     0.0, 0.0, 1, k, 0.0, &m, w.data(), vectors ? z.data() : nullptr,
                                     n, isuppz.data());
    detail::lapack_check(info, "dsyevr");
    out.values = w.head(m);
    if (vectors) out.vectors = z.leftCols(m);
    return out;
}

// Lowest k eigenpairs of a complex Hermitian matrix (k<0: all).
inline EigenPairs<CMat> eigh(const CMat& A, int k = -1, bool vectors = true) {
    const lapack_int n = static_cast<lapack_int>(A.rows());
    if (A.cols() != A.rows()) throw std::invalid_argument("eigh: matrix not square");
    if (k < 0 || k > n) k = static_cast<int>(n);
    EigenPairs<CMat> out;
    if (n == 0 || k == 0) return out;
    CMat work = A;
    RVec w(n);
    CMat z;
    if (vectors) z.resize(n, k);
    std::vector<lapack_int> isuppz(2 * std::max<lapack_int>(1, n));
    lapack_int m = 0;
    const char range = (k == n) ? 'A' : 'I';
    lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', range, 'U', n,
                                     reinterpret_cast<lapack_complex_double*>(work.data()), n, 0.0, 0.0, 1, k,
                                     0.0, &m, w.data(),
                                     vectors ? reinterpret_cast<lapack_complex_double*>(z.data()) : nullptr, n,
                                     isuppz.data());
    detail::lapack_check(info, "zheevr");
    out.values = w.head(m);
    if (vectors) out.vectors = z.leftCols(m);
    return out;
}

// Lowest k eigenpairs of the symmetric tridiagonal matrix with diagonal d and off-diagonal e.
inline EigenPairs<RMat> eigh_tridiagonal(const RVec& d, const RVec& e, int k, bool vectors = true) {
    const lapack_int n = static_cast<lapack_int>(d.size());
    if (e.size() + 1 != d.size()) throw std::invalid_argument("eigh_tridiagonal: size mismatch");
    if (k < 1 || k > n) k = static_cast<int>(n);
    RVec dd = d;
    RVec ee(n);
    ee.head(n - 1) = e;
    ee(n - 1) = 0.0;
    RVec w(n);
    RMat z;
    if (vectors) z.resize(n, k);
    std::vector<lapack_int> isuppz(2 * n);
    lapack_int m = 0;
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'I', n, dd.data(), ee.data(), 0.0,
                                     0.0, 1, k, 0.0, &m, w.data(), vectors ? z.data() : nullptr, n,
                                     isuppz.data());
    detail::lapack_check(info, "dstevr");
    EigenPairs<RMat> out;
    out.values = w.head(m);
    if (vectors) out.vectors = z.leftCols(m);
    return out;
}

template <class A, class B>
auto kron(const A& a, const B& b) {
    using Scalar = typename A::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = Eigen::kroneckerProduct(a, b);
    return out;
}

// Worker count from USCQED_WORKERS, defaulting to the hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("USCQED_WORKERS")) {
        try {
            int v = std::stoi(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Runs fn(i) for i in [0, n) on a small pool of threads; first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = worker_count()) {
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace uscqed
