// Compiled with -mavx2 -mfma; only reached after cpu_has_avx2().
#include <immintrin.h>

#include <algorithm>

#include "wsr/simd/raster_kernels.hpp"

namespace wsr::simd {

namespace {

// Cephes-style expf: x = n ln2 + r, 2^n by exponent-bit construction, degree-5
// polynomial for e^r. Inputs below -87.3 flush to zero.
inline __m256 exp_ps(__m256 x) {
    const __m256 lo = _mm256_set1_ps(-87.3f);
    const __m256 hi = _mm256_set1_ps(88.3f);
    const __m256 underflow = _mm256_cmp_ps(x, lo, _CMP_LT_OQ);
    x = _mm256_min_ps(_mm256_max_ps(x, lo), hi);

    const __m256 n = _mm256_floor_ps(_mm256_fmadd_ps(x, _mm256_set1_ps(1.44269504088896341f), _mm256_set1_ps(0.5f)));
    x = _mm256_fnmadd_ps(n, _mm256_set1_ps(0.693359375f), x);
    x = _mm256_fnmadd_ps(n, _mm256_set1_ps(-2.12194440e-4f), x);

    __m256 y = _mm256_set1_ps(1.9875691500e-4f);
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
    y = _mm256_fmadd_ps(y, _mm256_mul_ps(x, x), _mm256_add_ps(x, _mm256_set1_ps(1.0f)));

    const __m256i bits = _mm256_slli_epi32(_mm256_add_epi32(_mm256_cvtps_epi32(n), _mm256_set1_epi32(127)), 23);
    y = _mm256_mul_ps(y, _mm256_castsi256_ps(bits));
    return _mm256_andnot_ps(underflow, y);
}

inline __m256 abs_ps(__m256 v) { return _mm256_andnot_ps(_mm256_set1_ps(-0.0f), v); }

inline void neumaier(__m256& sum, __m256& comp, __m256 x) {
    const __m256 t = _mm256_add_ps(sum, x);
    const __m256 big_sum = _mm256_cmp_ps(abs_ps(sum), abs_ps(x), _CMP_GE_OQ);
    const __m256 a = _mm256_add_ps(_mm256_sub_ps(sum, t), x);
    const __m256 b = _mm256_add_ps(_mm256_sub_ps(x, t), sum);
    comp = _mm256_add_ps(comp, _mm256_blendv_ps(b, a, big_sum));
    sum = t;
}

}  // namespace

void raster_band_avx2(std::span<const RasterSplat<float>> splats, float alpha_floor, BandAccumulator<float>& acc) {
    const __m256 lane_offsets = _mm256_setr_ps(0.5f, 1.5f, 2.5f, 3.5f, 4.5f, 5.5f, 6.5f, 7.5f);
    const __m256i lane_ids = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    const __m256 floor_v = _mm256_set1_ps(alpha_floor);
    const __m256 neg_half = _mm256_set1_ps(-0.5f);

    for (const RasterSplat<float>& s : splats) {
        const int y_lo = std::max(s.y0, acc.y_begin);
        const int y_hi = std::min(s.y1, acc.y_end);
        const __m256 ca = _mm256_set1_ps(s.conic_a);
        const __m256 cb = _mm256_set1_ps(s.conic_b);
        const __m256 cc = _mm256_set1_ps(s.conic_c);
        const __m256 amp = _mm256_set1_ps(s.amplitude);
        const __m256 red = _mm256_set1_ps(s.red);
        const __m256 green = _mm256_set1_ps(s.green);
        const __m256 blue = _mm256_set1_ps(s.blue);
        const __m256 expo = _mm256_set1_ps(s.exponent);

        for (int y = y_lo; y < y_hi; ++y) {
            const float dyf = static_cast<float>(y) + 0.5f - s.mean_y;
            const __m256 dy = _mm256_set1_ps(dyf);
            const __m256 cdy2 = _mm256_mul_ps(cc, _mm256_mul_ps(dy, dy));
            const __m256 bdy = _mm256_mul_ps(cb, dy);
            for (int x = s.x0; x < s.x1; x += 8) {
                const __m256i in_row = _mm256_cmpgt_epi32(_mm256_set1_epi32(s.x1 - x), lane_ids);
                const __m256 dx = _mm256_add_ps(_mm256_set1_ps(static_cast<float>(x) - s.mean_x), lane_offsets);
                // power = -0.5 (a dx^2 + c dy^2) - b dx dy
                const __m256 quad = _mm256_fmadd_ps(_mm256_mul_ps(ca, dx), dx, cdy2);
                const __m256 power = _mm256_fnmadd_ps(bdy, dx, _mm256_mul_ps(neg_half, quad));
                const __m256 g = exp_ps(power);
                const __m256 keep = _mm256_and_ps(_mm256_castsi256_ps(in_row), _mm256_cmp_ps(g, floor_v, _CMP_GE_OQ));
                if (_mm256_testz_ps(keep, keep)) continue;
                const __m256i mask = _mm256_castps_si256(keep);
                const __m256 alpha = _mm256_and_ps(keep, _mm256_mul_ps(amp, g));
                const std::size_t i = acc.index(x, y);

                __m256 nr = _mm256_maskload_ps(acc.num_r.data() + i, mask);
                __m256 ng = _mm256_maskload_ps(acc.num_g.data() + i, mask);
                __m256 nb = _mm256_maskload_ps(acc.num_b.data() + i, mask);
                __m256 dn = _mm256_maskload_ps(acc.den.data() + i, mask);
                if (acc.stable) {
                    const __m256 m = _mm256_maskload_ps(acc.mu.data() + i, mask);
                    const __m256 lower = _mm256_cmp_ps(expo, m, _CMP_LT_OQ);
                    // lower: old sums *= exp(e - mu), new term unscaled; else new term *= exp(mu - e)
                    const __m256 diff = _mm256_sub_ps(expo, m);
                    const __m256 e = exp_ps(_mm256_blendv_ps(_mm256_sub_ps(m, expo), diff, lower));
                    const __m256 one = _mm256_set1_ps(1.0f);
                    const __m256 old_scale = _mm256_blendv_ps(one, e, lower);
                    const __m256 a = _mm256_mul_ps(alpha, _mm256_blendv_ps(e, one, lower));
                    nr = _mm256_fmadd_ps(nr, old_scale, _mm256_mul_ps(a, red));
                    ng = _mm256_fmadd_ps(ng, old_scale, _mm256_mul_ps(a, green));
                    nb = _mm256_fmadd_ps(nb, old_scale, _mm256_mul_ps(a, blue));
                    dn = _mm256_fmadd_ps(dn, old_scale, a);
                    _mm256_maskstore_ps(acc.mu.data() + i, mask, _mm256_min_ps(m, expo));
                } else {
                    __m256 kr = _mm256_maskload_ps(acc.comp_r.data() + i, mask);
                    __m256 kg = _mm256_maskload_ps(acc.comp_g.data() + i, mask);
                    __m256 kb = _mm256_maskload_ps(acc.comp_b.data() + i, mask);
                    __m256 kd = _mm256_maskload_ps(acc.comp_d.data() + i, mask);
                    neumaier(nr, kr, _mm256_mul_ps(alpha, red));
                    neumaier(ng, kg, _mm256_mul_ps(alpha, green));
                    neumaier(nb, kb, _mm256_mul_ps(alpha, blue));
                    neumaier(dn, kd, alpha);
                    _mm256_maskstore_ps(acc.comp_r.data() + i, mask, kr);
                    _mm256_maskstore_ps(acc.comp_g.data() + i, mask, kg);
                    _mm256_maskstore_ps(acc.comp_b.data() + i, mask, kb);
                    _mm256_maskstore_ps(acc.comp_d.data() + i, mask, kd);
                }
                _mm256_maskstore_ps(acc.num_r.data() + i, mask, nr);
                _mm256_maskstore_ps(acc.num_g.data() + i, mask, ng);
                _mm256_maskstore_ps(acc.num_b.data() + i, mask, nb);
                _mm256_maskstore_ps(acc.den.data() + i, mask, dn);
            }
        }
    }
}

}  // namespace wsr::simd
