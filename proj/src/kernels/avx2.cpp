// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <numbers>

#include "syncstab/kernels/kernels.hpp"

namespace syncstab::kernels::avx2 {

void converter_response(std::span<const double> omega, const PllResponse& pll,
                        std::span<double> re, std::span<double> im) {
    const std::size_t n = omega.size();
    const __m256d kp = _mm256_set1_pd(pll.kp);
    const __m256d ki = _mm256_set1_pd(pll.ki);
    const __m256d kp2 = _mm256_set1_pd(pll.kp * pll.kp);
    const __m256d ki2 = _mm256_set1_pd(pll.ki * pll.ki);
    const __m256d w0 = _mm256_set1_pd(pll.omega0);
    const __m256d u = _mm256_set1_pd(pll.u);

    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d w = _mm256_loadu_pd(omega.data() + k);
        const __m256d w2 = _mm256_mul_pd(w, w);
        const __m256d den = _mm256_mul_pd(u, _mm256_fmadd_pd(kp2, w2, ki2));
        const __m256d scale = _mm256_div_pd(w0, den);
        const __m256d r = _mm256_mul_pd(_mm256_mul_pd(scale, kp), w2);
        const __m256d i = _mm256_sub_pd(_mm256_mul_pd(_mm256_mul_pd(scale, ki), w), _mm256_div_pd(w0, w));
        _mm256_storeu_pd(re.data() + k, r);
        _mm256_storeu_pd(im.data() + k, i);
    }
    if (k < n) {
        scalar::converter_response(omega.subspan(k), pll, re.subspan(k), im.subspan(k));
    }
}

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a.data() + r * cols;
        __m256d acc = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x.data() + c), acc);
        }
        const __m128d lo = _mm256_castpd256_pd128(acc);
        const __m128d hi = _mm256_extractf128_pd(acc, 1);
        const __m128d pair = _mm_add_pd(lo, hi);
        double total = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
        for (; c < cols; ++c) total += row[c] * x[c];
        y[r] = total;
    }
}

void goertzel_power(std::span<const double> samples, std::span<const double> cycles_per_sample,
                    std::span<double> power) {
    const std::size_t nf = cycles_per_sample.size();
    const double n = static_cast<double>(samples.size());
    const __m256d inv_n2 = _mm256_set1_pd(1.0 / (n * n));

    std::size_t f = 0;
    for (; f + 4 <= nf; f += 4) {
        alignas(32) double c[4];
        for (int l = 0; l < 4; ++l)
            c[l] = 2.0 * std::cos(2.0 * std::numbers::pi * cycles_per_sample[f + static_cast<std::size_t>(l)]);
        const __m256d coeff = _mm256_load_pd(c);
        __m256d s1 = _mm256_setzero_pd();
        __m256d s2 = _mm256_setzero_pd();
        for (double x : samples) {
            const __m256d s0 = _mm256_fmadd_pd(coeff, s1, _mm256_sub_pd(_mm256_set1_pd(x), s2));
            s2 = s1;
            s1 = s0;
        }
        // s1^2 + s2^2 - coeff s1 s2
        const __m256d p = _mm256_sub_pd(_mm256_fmadd_pd(s1, s1, _mm256_mul_pd(s2, s2)),
                                        _mm256_mul_pd(coeff, _mm256_mul_pd(s1, s2)));
        _mm256_storeu_pd(power.data() + f, _mm256_mul_pd(p, inv_n2));
    }
    if (f < nf) {
        scalar::goertzel_power(samples, cycles_per_sample.subspan(f), power.subspan(f));
    }
}

}  // namespace syncstab::kernels::avx2
