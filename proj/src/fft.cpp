#include "lfpp/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace lfpp {
namespace {

struct Plan {
    std::vector<int> bitrev;
    std::vector<std::complex<double>> twiddle;  // e^{-i pi k / m} tables, stacked per stage
};

// Twiddles are laid out stage by stage: for half-size m = 1,2,4,...,n/2 the
// factors e^{-2pi i k/(2m)}, k in [0, m).
std::shared_ptr<const Plan> plan_for(int n) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const Plan>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    auto plan = std::make_shared<Plan>();
    plan->bitrev.resize(n);
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1) << (log2n - 1 - b);
        plan->bitrev[i] = r;
    }
    plan->twiddle.reserve(n - 1);
    for (int m = 1; m < n; m <<= 1) {
        for (int k = 0; k < m; ++k) {
            const double ang = -M_PI * double(k) / double(m);
            plan->twiddle.emplace_back(std::cos(ang), std::sin(ang));
        }
    }
    cache[n] = plan;
    return plan;
}

}  // namespace

void fft_pow2(std::complex<double>* a, int n, bool inverse) {
    if (n <= 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: length must be a power of two");
    if (n == 1) return;
    const auto plan = plan_for(n);

    if (inverse) {
        for (int i = 0; i < n; ++i) a[i] = std::conj(a[i]);
    }
    for (int i = 0; i < n; ++i) {
        const int r = plan->bitrev[i];
        if (i < r) std::swap(a[i], a[r]);
    }
    const std::complex<double>* tw = plan->twiddle.data();
    for (int m = 1; m < n; m <<= 1) {
        for (int base = 0; base < n; base += 2 * m) {
            for (int k = 0; k < m; ++k) {
                const std::complex<double> t = tw[k] * a[base + m + k];
                const std::complex<double> u = a[base + k];
                a[base + k] = u + t;
                a[base + m + k] = u - t;
            }
        }
        tw += m;
    }
    if (inverse) {
        for (int i = 0; i < n; ++i) a[i] = std::conj(a[i]);
    }
}

void fft2_pow2(ComplexGrid& grid, bool inverse) {
    const int n = int(grid.rows());
    if (grid.cols() != n) throw std::invalid_argument("fft2_pow2: grid must be square");
    // Column-major storage: transform contiguous columns, transpose, repeat.
    for (int c = 0; c < n; ++c) fft_pow2(grid.col(c).data(), n, inverse);
    grid.transposeInPlace();
    for (int c = 0; c < n; ++c) fft_pow2(grid.col(c).data(), n, inverse);
    grid.transposeInPlace();
}

}  // namespace lfpp
