#include "maskbench/matops.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace maskbench {

namespace {
std::atomic<int> g_jobs{0};
}

void set_worker_count(int jobs) { g_jobs.store(jobs < 0 ? 0 : jobs); }

int worker_count() {
    int j = g_jobs.load();
    if (j > 0) return j;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_chunks(std::size_t total,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    int jobs = worker_count();
    if (jobs <= 1 || total < 2) {
        if (total > 0) fn(0, total);
        return;
    }
    std::size_t nchunks = std::min<std::size_t>(static_cast<std::size_t>(jobs), total);
    std::size_t base = total / nchunks;
    std::size_t extra = total % nchunks;
    std::vector<std::thread> threads;
    threads.reserve(nchunks);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < nchunks; ++c) {
        std::size_t len = base + (c < extra ? 1 : 0);
        std::size_t end = begin + len;
        threads.emplace_back([&fn, begin, end] { fn(begin, end); });
        begin = end;
    }
    for (auto& t : threads) t.join();
}

double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

namespace {

// Four dot products against one shared left operand; one pass over `a`.
void dot4(const double* a, const double* b0, const double* b1, const double* b2,
          const double* b3, std::size_t n, double* out) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = a[i];
        s0 += v * b0[i];
        s1 += v * b1[i];
        s2 += v * b2[i];
        s3 += v * b3[i];
    }
    out[0] = s0;
    out[1] = s1;
    out[2] = s2;
    out[3] = s3;
}

}  // namespace

void linear_scores(const Matrix& x, const Matrix& w, const std::vector<double>& bias,
                   Matrix& scores) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    const std::size_t c = w.rows;
    scores.rows = n;
    scores.cols = c;
    scores.data.assign(n * c, 0.0);
    parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double* xi = x.row(i);
            double* si = scores.row(i);
            std::size_t k = 0;
            for (; k + 4 <= c; k += 4) {
                double out[4];
                dot4(xi, w.row(k), w.row(k + 1), w.row(k + 2), w.row(k + 3), d, out);
                si[k] = out[0] + bias[k];
                si[k + 1] = out[1] + bias[k + 1];
                si[k + 2] = out[2] + bias[k + 2];
                si[k + 3] = out[3] + bias[k + 3];
            }
            for (; k < c; ++k) si[k] = dot(xi, w.row(k), d) + bias[k];
        }
    });
}

void feature_weighted_sums(const Matrix& xt, const Matrix& coeff, Matrix& grad) {
    const std::size_t d = xt.rows;
    const std::size_t n = xt.cols;
    const std::size_t c = coeff.cols;
    grad.rows = d;
    grad.cols = c;
    grad.data.assign(d * c, 0.0);
    parallel_chunks(d, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const double* xj = xt.row(j);
            double* gj = grad.row(j);
            for (std::size_t i = 0; i < n; ++i) {
                double v = xj[i];
                if (v == 0.0) continue;  // adding exact zeros is a no-op
                const double* ci = coeff.row(i);
                for (std::size_t k = 0; k < c; ++k) gj[k] += v * ci[k];
            }
        }
    });
}

Matrix transpose(const Matrix& x) {
    Matrix out(x.cols, x.rows);
    constexpr std::size_t kBlock = 32;
    for (std::size_t i0 = 0; i0 < x.rows; i0 += kBlock)
        for (std::size_t j0 = 0; j0 < x.cols; j0 += kBlock)
            for (std::size_t i = i0; i < std::min(i0 + kBlock, x.rows); ++i)
                for (std::size_t j = j0; j < std::min(j0 + kBlock, x.cols); ++j)
                    out.at(j, i) = x.at(i, j);
    return out;
}

CsrMatrix CsrMatrix::from_dense(const Matrix& x) {
    CsrMatrix out;
    out.rows = x.rows;
    out.cols = x.cols;
    out.row_begin.reserve(x.rows + 1);
    out.row_begin.push_back(0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            if (xi[j] != 0.0) {
                out.col.push_back(static_cast<std::uint32_t>(j));
                out.val.push_back(xi[j]);
            }
        }
        out.row_begin.push_back(out.col.size());
    }
    return out;
}

void csr_linear_scores(const CsrMatrix& x, const Matrix& w,
                       const std::vector<double>& bias, Matrix& scores) {
    const std::size_t n = x.rows;
    const std::size_t nc = w.rows;
    // Work against W^T padded to a SIMD-friendly row width so the inner
    // accumulation runs lane-parallel over classes.
    const std::size_t pad = (nc + 7) & ~std::size_t(7);
    static thread_local Matrix wt;
    wt.rows = x.cols;
    wt.cols = pad;
    wt.data.assign(x.cols * pad, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const double* wc = w.row(c);
        for (std::size_t j = 0; j < x.cols; ++j) wt.data[j * pad + c] = wc[j];
    }

    scores.rows = n;
    scores.cols = nc;
    scores.data.assign(n * nc, 0.0);
    parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(pad);
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t p = x.row_begin[i]; p < x.row_begin[i + 1]; ++p) {
                const double v = x.val[p];
                const double* wrow = &wt.data[x.col[p] * pad];
                for (std::size_t c = 0; c < pad; ++c) acc[c] += v * wrow[c];
            }
            double* si = scores.row(i);
            for (std::size_t c = 0; c < nc; ++c) si[c] = acc[c] + bias[c];
        }
    });
}

void csc_feature_weighted_sums(const CsrMatrix& x_csc, const Matrix& coeff,
                               Matrix& grad) {
    const std::size_t d = x_csc.rows;
    const std::size_t nc = coeff.cols;
    grad.rows = d;
    grad.cols = nc;
    grad.data.assign(d * nc, 0.0);
    parallel_chunks(d, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            double* gj = grad.row(j);
            for (std::size_t p = x_csc.row_begin[j]; p < x_csc.row_begin[j + 1]; ++p) {
                const double v = x_csc.val[p];
                const double* ci = coeff.row(x_csc.col[p]);
                for (std::size_t c = 0; c < nc; ++c) gj[c] += v * ci[c];
            }
        }
    });
}

}  // namespace maskbench
