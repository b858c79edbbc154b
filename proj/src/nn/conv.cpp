#include "nn/conv.hpp"

#include <algorithm>
#include <cstring>
#include <utility>
#include <vector>

#include "common/errors.hpp"

namespace nmp::nn {

void ConvSpec::validate() const
{
    if (in_channels == 0 || out_channels == 0)
        throw ContractError("conv: channel counts must be positive");
    if (kernel_time % 2 == 0 || kernel_freq % 2 == 0)
        throw ContractError("conv: kernel dimensions must be odd");
    if (freq_stride != 1 && freq_stride != 3)
        throw ContractError("conv: frequency stride must be 1 or 3");
}

namespace {

struct Tap {
    std::size_t phase;
    long shift;
};

// Input bin read by output j for frequency tap kf is stride*(j + shift) + phase.
std::vector<Tap> frequencyTaps(const ConvSpec& spec)
{
    const long s = long(spec.freq_stride);
    const long centre = s == 3 ? 1 : 0;
    const long half = long(spec.kernel_freq / 2);
    std::vector<Tap> taps(spec.kernel_freq);
    for (long kf = 0; kf < long(spec.kernel_freq); ++kf) {
        const long off = centre + kf - half;
        long q = off / s;
        if (off % s != 0 && off < 0)
            --q;
        taps[std::size_t(kf)] = {std::size_t(off - q * s), q};
    }
    return taps;
}

template <class T>
void checkShapes(const Tensor<T>& x, const Tensor<T>& w, const ConvSpec& spec)
{
    spec.validate();
    if (x.rank() != 4 || x.channels() != spec.in_channels)
        throw ContractError("conv: input shape " + shapeString(x.dims()) + " does not match "
                            + std::to_string(spec.in_channels) + " input channels");
    if (w.dims() != spec.weightShape())
        throw ContractError("conv: weight shape " + shapeString(w.dims()) + ", expected "
                            + shapeString(spec.weightShape()));
}

template <class T>
struct Simd {
    static constexpr std::size_t kLanes = 64 / sizeof(T);
    typedef T V __attribute__((vector_size(64)));
    typedef T Unaligned __attribute__((vector_size(64), aligned(sizeof(T)), may_alias));

    static V load(const T* p) { return *reinterpret_cast<const Unaligned*>(p); }
    static void store(T* p, V v) { *reinterpret_cast<Unaligned*>(p) = v; }
    static V splat(T x) { return V{} + x; }
};

// Calls f(integral_constant<I>) for I = 0..N-1, so that accumulator arrays
// are only ever indexed by constants and stay in registers.
template <std::size_t N, class F>
[[gnu::always_inline]] inline void unroll(F&& f)
{
    [&]<std::size_t... I>(std::index_sequence<I...>) {
        (f(std::integral_constant<std::size_t, I>{}), ...);
    }(std::make_index_sequence<N>{});
}

// Widest output tile, in vectors, used by any kernel below.
constexpr std::size_t kMaxTileVectors = 8;

// Rows of `rows` x `length` values with zero margins on both sides, so that
// shifted tile reads never need bounds checks.
template <class T>
class PaddedRows {
public:
    PaddedRows(std::size_t rows, std::size_t length, std::size_t padLeft, std::size_t padRight)
        : mPadLeft(padLeft)
        , mStride(padLeft + length + padRight)
        , mData(rows * mStride, T(0))
    {
    }

    T* row(std::size_t r) { return mData.data() + r * mStride + mPadLeft; }
    const T* row(std::size_t r) const { return mData.data() + r * mStride + mPadLeft; }

private:
    std::size_t mPadLeft;
    std::size_t mStride;
    std::vector<T> mData;
};

struct Geometry {
    std::size_t batch, frames, bins, stride, length;
    // Row length rounded up so any tile starting below `length` fits.
    std::size_t padded;
    long minShift, maxShift;
    std::size_t kt, kf;
    long padT;
};

template <class T>
Geometry geometry(const Tensor<T>& x, const ConvSpec& spec, const std::vector<Tap>& taps)
{
    constexpr std::size_t lanes = Simd<T>::kLanes;
    Geometry g;
    g.batch = x.batch();
    g.frames = x.frames();
    g.bins = x.bins();
    g.stride = spec.freq_stride;
    g.length = (g.bins + g.stride - 1) / g.stride;
    g.padded = (g.length + lanes - 1) / lanes * lanes + kMaxTileVectors * lanes;
    g.minShift = 0;
    g.maxShift = 0;
    for (const Tap& t : taps) {
        g.minShift = std::min(g.minShift, t.shift);
        g.maxShift = std::max(g.maxShift, t.shift);
    }
    g.kt = spec.kernel_time;
    g.kf = spec.kernel_freq;
    g.padT = long(spec.kernel_time / 2);
    return g;
}

// Input regrouped by bin residue modulo the stride, so every frequency tap
// reads a contiguous run. Row index: ((n * C + c) * stride + phase) * T + t.
template <class T>
PaddedRows<T> phasePlanes(const Tensor<T>& x, const Geometry& g)
{
    const std::size_t channels = x.channels();
    PaddedRows<T> planes(g.batch * channels * g.stride * g.frames, g.length, std::size_t(-g.minShift),
                         g.padded - g.length + std::size_t(g.maxShift));
    for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t t = 0; t < g.frames; ++t) {
                const T* src = x.row(n, c, t);
                for (std::size_t phase = 0; phase < g.stride; ++phase) {
                    T* dst = planes.row(((n * channels + c) * g.stride + phase) * g.frames + t);
                    for (std::size_t f = phase, j = 0; f < g.bins; f += g.stride, ++j)
                        dst[j] = src[f];
                }
            }
    return planes;
}

// Output channels [oc, oc + OCB) of row (n, t), bins [j0, j0 + TV * lanes).
template <class T, std::size_t OCB, std::size_t TV>
void forwardTile(const PaddedRows<T>& planes, const Tensor<T>& w, const Tensor<T>& b, const ConvSpec& spec,
                 const Geometry& g, const std::vector<Tap>& taps, std::size_t n, std::size_t oc, std::size_t t,
                 std::size_t j0, T* const* out)
{
    using S = Simd<T>;
    using V = typename S::V;
    V acc[OCB][TV];
    unroll<OCB>([&](auto o) { unroll<TV>([&](auto v) { acc[o][v] = S::splat(b[oc + o]); }); });
    const std::size_t icCount = spec.in_channels;
    const std::size_t kernel = g.kt * g.kf;
    for (std::size_t ic = 0; ic < icCount; ++ic) {
        const std::size_t rowBase = (n * icCount + ic) * g.stride;
        for (std::size_t i = 0; i < g.kt; ++i) {
            const long ti = long(t) + long(i) - g.padT;
            if (ti < 0 || ti >= long(g.frames))
                continue;
            const T* wk[OCB];
            unroll<OCB>([&](auto o) { wk[o] = w.data() + ((oc + o) * icCount + ic) * kernel + i * g.kf; });
            for (std::size_t k = 0; k < g.kf; ++k) {
                const Tap tap = taps[k];
                const T* src = planes.row((rowBase + tap.phase) * g.frames + std::size_t(ti)) + tap.shift + long(j0);
                V s[TV];
                unroll<TV>([&](auto v) { s[v] = S::load(src + v * S::kLanes); });
                unroll<OCB>([&](auto o) {
                    const V wv = S::splat(wk[o][k]);
                    unroll<TV>([&](auto v) { acc[o][v] += wv * s[v]; });
                });
            }
        }
    }
    unroll<OCB>([&](auto o) { unroll<TV>([&](auto v) { S::store(out[o] + j0 + v * S::kLanes, acc[o][v]); }); });
}

} // namespace

template <class T>
void conv2dForward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, const ConvSpec& spec, Tensor<T>& y)
{
    checkShapes(x, w, spec);
    if (b.size() != spec.out_channels)
        throw ContractError("conv: bias length " + std::to_string(b.size()) + ", expected "
                            + std::to_string(spec.out_channels));
    const auto taps = frequencyTaps(spec);
    const Geometry g = geometry(x, spec, taps);
    const PaddedRows<T> planes = phasePlanes(x, g);
    const std::size_t outBins = g.length;

    y = Tensor<T>({g.batch, spec.out_channels, g.frames, outBins});
    constexpr std::size_t kBlock = 4;
    std::vector<T> scratch(kBlock * g.padded);
    for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t t = 0; t < g.frames; ++t) {
            std::size_t oc = 0;
            auto run = [&]<std::size_t OCB, std::size_t TV>() {
                T* out[OCB];
                for (std::size_t o = 0; o < OCB; ++o)
                    out[o] = scratch.data() + o * g.padded;
                for (std::size_t j0 = 0; j0 < outBins; j0 += TV * Simd<T>::kLanes)
                    forwardTile<T, OCB, TV>(planes, w, b, spec, g, taps, n, oc, t, j0, out);
                for (std::size_t o = 0; o < OCB; ++o)
                    std::copy_n(out[o], outBins, y.row(n, oc + o, t));
                oc += OCB;
            };
            while (oc + kBlock <= spec.out_channels)
                run.template operator()<kBlock, 3>();
            while (oc < spec.out_channels)
                run.template operator()<1, kMaxTileVectors>();
        }
}

namespace {

// dL/dx in phase-plane form: gp[ic, phase, ti][p] is a sum over output
// channels, time taps and the frequency taps of that phase of
// w * gy[oc, ti - i + padT][p - shift].
template <class T, std::size_t ICB, std::size_t TV>
void inputGradTile(const PaddedRows<T>& gyRows, const Tensor<T>& w, const ConvSpec& spec, const Geometry& g,
                   const std::vector<Tap>& taps, std::size_t n, std::size_t ic, std::size_t phase, std::size_t ti,
                   std::size_t p0, T* const* out)
{
    using S = Simd<T>;
    using V = typename S::V;
    V acc[ICB][TV];
    unroll<ICB>([&](auto c) { unroll<TV>([&](auto v) { acc[c][v] = V{}; }); });
    const std::size_t kernel = g.kt * g.kf;
    for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
        for (std::size_t i = 0; i < g.kt; ++i) {
            const long t = long(ti) - long(i) + g.padT;
            if (t < 0 || t >= long(g.frames))
                continue;
            const T* gyRow = gyRows.row((n * spec.out_channels + oc) * g.frames + std::size_t(t));
            const T* wk[ICB];
            unroll<ICB>([&](auto c) { wk[c] = w.data() + (oc * spec.in_channels + ic + c) * kernel + i * g.kf; });
            for (std::size_t k = 0; k < g.kf; ++k) {
                const Tap tap = taps[k];
                if (tap.phase != phase)
                    continue;
                const T* src = gyRow - tap.shift + long(p0);
                V s[TV];
                unroll<TV>([&](auto v) { s[v] = S::load(src + v * S::kLanes); });
                unroll<ICB>([&](auto c) {
                    const V wv = S::splat(wk[c][k]);
                    unroll<TV>([&](auto v) { acc[c][v] += wv * s[v]; });
                });
            }
        }
    }
    unroll<ICB>([&](auto c) { unroll<TV>([&](auto v) { S::store(out[c] + p0 + v * S::kLanes, acc[c][v]); }); });
}

// Adds lane-wise partial sums of dL/dw for output channels [oc, oc + OCB),
// input channel ic and time tap i over one (n, t) row pair into `partial`
// (one vector per weight, reduced once at the end).
template <class T, std::size_t OCB, std::size_t KC>
void weightGradRow(const PaddedRows<T>& planes, const PaddedRows<T>& gyRows, const ConvSpec& spec, const Geometry& g,
                   const std::vector<Tap>& taps, std::size_t n, std::size_t oc, std::size_t ic, std::size_t t,
                   std::size_t i, std::size_t ti, typename Simd<T>::V* partial)
{
    using S = Simd<T>;
    using V = typename S::V;
    const std::size_t vectors = (g.length + S::kLanes - 1) / S::kLanes;
    const T* gyRow[OCB];
    unroll<OCB>([&](auto o) { gyRow[o] = gyRows.row((n * spec.out_channels + oc + o) * g.frames + t); });
    const std::size_t rowBase = (n * spec.in_channels + ic) * g.stride;
    const std::size_t kernel = g.kt * g.kf;
    for (std::size_t k0 = 0; k0 < g.kf; k0 += KC) {
        const std::size_t kn = std::min(KC, g.kf - k0);
        const T* src[KC];
        unroll<KC>([&](auto kk) {
            const Tap tap = taps[k0 + std::min<std::size_t>(kk, kn - 1)];
            src[kk] = planes.row((rowBase + tap.phase) * g.frames + ti) + tap.shift;
        });
        V acc[OCB][KC];
        unroll<OCB>([&](auto o) { unroll<KC>([&](auto kk) { acc[o][kk] = V{}; }); });
        for (std::size_t jv = 0; jv < vectors; ++jv) {
            const std::size_t j = jv * S::kLanes;
            V gv[OCB];
            unroll<OCB>([&](auto o) { gv[o] = S::load(gyRow[o] + j); });
            unroll<KC>([&](auto kk) {
                const V s = S::load(src[kk] + j);
                unroll<OCB>([&](auto o) { acc[o][kk] += gv[o] * s; });
            });
        }
        unroll<OCB>([&](auto o) {
            V* dst = partial + ((oc + o) * spec.in_channels + ic) * kernel + i * g.kf + k0;
            unroll<KC>([&](auto kk) {
                if (kk < kn)
                    dst[kk] += acc[o][kk];
            });
        });
    }
}

} // namespace

template <class T>
void conv2dBackward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gy, const ConvSpec& spec, Tensor<T>* gx,
                    Tensor<T>& gw, Tensor<T>& gb)
{
    using S = Simd<T>;
    checkShapes(x, w, spec);
    const auto taps = frequencyTaps(spec);
    const Geometry g = geometry(x, spec, taps);
    const std::size_t outBins = g.length;
    if (gy.dims() != Shape{g.batch, spec.out_channels, g.frames, outBins})
        throw ContractError("conv backward: upstream gradient shape " + shapeString(gy.dims()));

    gb = Tensor<T>({spec.out_channels});
    for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
            T acc = 0;
            for (std::size_t t = 0; t < g.frames; ++t) {
                const T* row = gy.row(n, oc, t);
                for (std::size_t j = 0; j < outBins; ++j)
                    acc += row[j];
            }
            gb[oc] += acc;
        }

    // Upstream gradient with zero margins wide enough for reads shifted by any tap.
    PaddedRows<T> gyRows(g.batch * spec.out_channels * g.frames, outBins, std::size_t(g.maxShift),
                         g.padded - outBins + std::size_t(-g.minShift));
    for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t oc = 0; oc < spec.out_channels; ++oc)
            for (std::size_t t = 0; t < g.frames; ++t)
                std::copy_n(gy.row(n, oc, t), outBins, gyRows.row((n * spec.out_channels + oc) * g.frames + t));

    const PaddedRows<T> planes = phasePlanes(x, g);
    std::vector<typename S::V> partial(w.size(), typename S::V{});
    constexpr std::size_t kBlock = 4;
    for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t t = 0; t < g.frames; ++t)
            for (std::size_t i = 0; i < g.kt; ++i) {
                const long ti = long(t) + long(i) - g.padT;
                if (ti < 0 || ti >= long(g.frames))
                    continue;
                for (std::size_t ic = 0; ic < spec.in_channels; ++ic) {
                    std::size_t oc = 0;
                    for (; oc + kBlock <= spec.out_channels; oc += kBlock)
                        weightGradRow<T, kBlock, 6>(planes, gyRows, spec, g, taps, n, oc, ic, t, i, std::size_t(ti),
                                                    partial.data());
                    for (; oc < spec.out_channels; ++oc)
                        weightGradRow<T, 1, 8>(planes, gyRows, spec, g, taps, n, oc, ic, t, i, std::size_t(ti),
                                               partial.data());
                }
            }
    gw = Tensor<T>(spec.weightShape());
    for (std::size_t k = 0; k < gw.size(); ++k) {
        T lanes[S::kLanes];
        std::memcpy(lanes, &partial[k], sizeof lanes);
        T sum = 0;
        for (T v : lanes)
            sum += v;
        gw[k] = sum;
    }

    if (!gx)
        return;
    *gx = Tensor<T>(x.dims());
    std::vector<T> scratch(kBlock * g.padded);
    for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t ti = 0; ti < g.frames; ++ti)
            for (std::size_t phase = 0; phase < g.stride; ++phase) {
                std::size_t ic = 0;
                auto run = [&]<std::size_t ICB, std::size_t TV>() {
                    T* out[ICB];
                    for (std::size_t c = 0; c < ICB; ++c)
                        out[c] = scratch.data() + c * g.padded;
                    for (std::size_t p0 = 0; p0 < g.length; p0 += TV * S::kLanes)
                        inputGradTile<T, ICB, TV>(gyRows, w, spec, g, taps, n, ic, phase, ti, p0, out);
                    for (std::size_t c = 0; c < ICB; ++c) {
                        T* dst = gx->row(n, ic + c, ti);
                        for (std::size_t f = phase, p = 0; f < g.bins; f += g.stride, ++p)
                            dst[f] = out[c][p];
                    }
                    ic += ICB;
                };
                while (ic + kBlock <= spec.in_channels)
                    run.template operator()<kBlock, 3>();
                while (ic < spec.in_channels)
                    run.template operator()<1, kMaxTileVectors>();
            }
}

template void conv2dForward<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, const ConvSpec&,
                                   Tensor<float>&);
template void conv2dForward<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                    const ConvSpec&, Tensor<double>&);
template void conv2dBackward<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, const ConvSpec&,
                                    Tensor<float>*, Tensor<float>&, Tensor<float>&);
template void conv2dBackward<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                     const ConvSpec&, Tensor<double>*, Tensor<double>&, Tensor<double>&);

} // namespace nmp::nn
