#include "audio/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "common/errors.hpp"

namespace nmp::audio {
namespace {

// Zeroth-order modified Bessel function of the first kind (power series).
double besselI0(double x)
{
    double sum = 1.0;
    double term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (double(k) * k);
        sum += term;
        if (term < sum * 1e-17)
            break;
    }
    return sum;
}

class SincKernel {
public:
    SincKernel(double cutoff, double halfWidth, double beta)
        : mCutoff(cutoff)
        , mHalfWidth(halfWidth)
        , mBeta(beta)
        , mNorm(1.0 / besselI0(beta))
    {
    }

    // Impulse response at offset `tau` input samples from the output instant.
    double operator()(double tau) const
    {
        const double r = tau / mHalfWidth;
        if (r <= -1.0 || r >= 1.0)
            return 0.0;
        const double window = besselI0(mBeta * std::sqrt(1.0 - r * r)) * mNorm;
        const double x = mCutoff * tau;
        const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        return mCutoff * sinc * window;
    }

private:
    double mCutoff;
    double mHalfWidth;
    double mBeta;
    double mNorm;
};

constexpr std::int64_t kMaxTablePhases = 4096;

} // namespace

AudioBuffer resample(const AudioBuffer& buf, int target_rate, const ResamplerConfig& cfg)
{
    if (target_rate <= 0)
        throw ContractError("resample: target rate must be positive");
    if (buf.sample_rate <= 0)
        throw ContractError("resample: source rate must be positive");
    if (target_rate == buf.sample_rate)
        return buf;

    const std::int64_t g = std::gcd(buf.sample_rate, target_rate);
    const std::int64_t up = target_rate / g;
    const std::int64_t down = buf.sample_rate / g;
    const auto inLen = static_cast<std::int64_t>(buf.samples.size());
    const std::int64_t outLen = (2 * inLen * target_rate + buf.sample_rate) / (2 * std::int64_t(buf.sample_rate));

    // Work in units of input samples; the kernel spans `taps` samples of
    // whichever rate is lower.
    const double ratio = std::min(1.0, double(up) / double(down));
    const double cutoff = cfg.rolloff * ratio;
    const double halfWidth = 0.5 * cfg.taps / ratio;
    const SincKernel kernel(cutoff, halfWidth, cfg.kaiser_beta);
    const auto reach = static_cast<std::int64_t>(std::ceil(halfWidth));
    const std::int64_t width = 2 * reach;

    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.assign(static_cast<std::size_t>(outLen), 0.0);

    // Phase p of output n sits at input position floor(n*down/up) + p/up.
    std::vector<double> table;
    const bool tabulate = up <= kMaxTablePhases;
    if (tabulate) {
        table.resize(static_cast<std::size_t>(up * width));
        for (std::int64_t p = 0; p < up; ++p) {
            const double frac = double(p) / double(up);
            for (std::int64_t k = 0; k < width; ++k)
                table[p * width + k] = kernel(frac - double(k - reach + 1));
        }
    }

    std::vector<double> taps(static_cast<std::size_t>(width));
    const double* x = buf.samples.data();
    for (std::int64_t n = 0; n < outLen; ++n) {
        const std::int64_t pos = n * down;
        const std::int64_t base = pos / up;
        const std::int64_t phase = pos % up;
        const double* h;
        if (tabulate) {
            h = table.data() + phase * width;
        } else {
            const double frac = double(phase) / double(up);
            for (std::int64_t k = 0; k < width; ++k)
                taps[k] = kernel(frac - double(k - reach + 1));
            h = taps.data();
        }
        const std::int64_t first = base - reach + 1;
        const std::int64_t kLo = std::max<std::int64_t>(0, -first);
        const std::int64_t kHi = std::min<std::int64_t>(width, inLen - first);
        double acc = 0.0;
        for (std::int64_t k = kLo; k < kHi; ++k)
            acc += h[k] * x[first + k];
        out.samples[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

} // namespace nmp::audio
