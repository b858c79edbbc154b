#include "spectral/cqt.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "common/errors.hpp"

namespace nmp::spectral {
namespace {

// FFTW planning is not thread-safe.
std::mutex& plannerMutex()
{
    static std::mutex m;
    return m;
}

int nextPow2(int n)
{
    int p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

} // namespace

double CqtConfig::binFrequency(double bin) const
{
    return base_frequency * std::exp2(bin / binsPerOctave());
}

double CqtConfig::quality() const
{
    return 1.0 / (std::exp2(1.0 / binsPerOctave()) - 1.0);
}

struct CqtKernel::Plan {
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;

    explicit Plan(int n)
    {
        std::lock_guard lock(plannerMutex());
        in = fftw_alloc_real(std::size_t(n));
        out = fftw_alloc_complex(std::size_t(n / 2 + 1));
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    ~Plan()
    {
        std::lock_guard lock(plannerMutex());
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
};

CqtKernel::CqtKernel(const CqtConfig& cfg)
    : mConfig(cfg)
{
    if (cfg.n_bins <= 0 || cfg.hop_samples <= 0 || cfg.sample_rate <= 0 || cfg.bins_per_semitone <= 0)
        throw ContractError("cqt: configuration values must be positive");
    mFftLength = nextPow2(cfg.max_kernel_length);
    const int n = mFftLength;
    const int maxLen = (cfg.max_kernel_length % 2 == 0) ? cfg.max_kernel_length - 1 : cfg.max_kernel_length;
    const double q = cfg.quality();
    const double nyquist = 0.5 * cfg.sample_rate;

    mLengths.assign(std::size_t(cfg.n_bins), 0);
    mBands.resize(std::size_t(cfg.n_bins));

    std::vector<std::complex<double>> temporal(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(n));
    fftw_plan plan;
    {
        std::lock_guard lock(plannerMutex());
        plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(temporal.data()),
                                reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    }

    for (int k = 0; k < cfg.n_bins; ++k) {
        const double f = cfg.binFrequency(k);
        if (f > cfg.nyquist_guard * nyquist)
            continue;
        int len = static_cast<int>(std::ceil(q * cfg.sample_rate / f));
        len |= 1;
        len = std::min(len, maxLen);
        mLengths[k] = len;
        const int half = len / 2;

        std::fill(temporal.begin(), temporal.end(), 0.0);
        double windowSum = 0.0;
        for (int tau = -half; tau <= half; ++tau)
            windowSum += 0.5 * (1.0 + std::cos(std::numbers::pi * tau / (half + 1)));
        const double omega = 2.0 * std::numbers::pi * f / cfg.sample_rate;
        for (int tau = -half; tau <= half; ++tau) {
            const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * tau / (half + 1))) / windowSum;
            temporal[std::size_t(n / 2 + tau)] = std::polar(w, -omega * tau);
        }
        fftw_execute(plan);

        // S[m] = A[-m] / N, restricted to the non-negative half the r2c FFT gives us.
        std::vector<std::complex<double>> s(std::size_t(n / 2 + 1));
        double peak = 0.0;
        for (int m = 0; m <= n / 2; ++m) {
            s[m] = spectrum[std::size_t((n - m) % n)] / double(n);
            peak = std::max(peak, std::abs(s[m]));
        }
        const double floor = cfg.sparsity * peak;
        int first = 0;
        while (first <= n / 2 && std::abs(s[first]) < floor)
            ++first;
        int last = n / 2;
        while (last > first && std::abs(s[last]) < floor)
            --last;
        mBands[k].first = first;
        mBands[k].coeffs.assign(s.begin() + first, s.begin() + last + 1);
    }
    {
        std::lock_guard lock(plannerMutex());
        fftw_destroy_plan(plan);
    }
    mPlan = std::make_unique<Plan>(n);
}

CqtKernel::~CqtKernel() = default;

CqtMatrix CqtKernel::magnitudes(const std::vector<double>& samples) const
{
    CqtMatrix out;
    out.frames = cqtFrameCount(samples.size(), mConfig.hop_samples);
    out.bins = std::size_t(mConfig.n_bins);
    out.frame_period = mConfig.framePeriod();
    out.magnitudes.assign(out.frames * out.bins, 0.0f);

    const int n = mFftLength;
    // Each call gets private buffers so the kernel stays shareable.
    double* in = fftw_alloc_real(std::size_t(n));
    fftw_complex* spec = fftw_alloc_complex(std::size_t(n / 2 + 1));
    const auto total = static_cast<std::int64_t>(samples.size());
    for (std::size_t t = 0; t < out.frames; ++t) {
        const std::int64_t start = std::int64_t(t) * mConfig.hop_samples - n / 2;
        for (int j = 0; j < n; ++j) {
            const std::int64_t idx = start + j;
            in[j] = (idx >= 0 && idx < total) ? samples[std::size_t(idx)] : 0.0;
        }
        fftw_execute_dft_r2c(mPlan->plan, in, spec);
        const auto* x = reinterpret_cast<const std::complex<double>*>(spec);
        float* row = out.magnitudes.data() + t * out.bins;
        for (std::size_t k = 0; k < out.bins; ++k) {
            const Band& band = mBands[k];
            if (band.coeffs.empty())
                continue;
            double re = 0.0;
            double im = 0.0;
            const std::complex<double>* xs = x + band.first;
            for (std::size_t m = 0; m < band.coeffs.size(); ++m) {
                const auto a = xs[m];
                const auto b = band.coeffs[m];
                re += a.real() * b.real() - a.imag() * b.imag();
                im += a.real() * b.imag() + a.imag() * b.real();
            }
            row[k] = static_cast<float>(std::hypot(re, im));
        }
    }
    fftw_free(in);
    fftw_free(spec);
    return out;
}

std::shared_ptr<const CqtKernel> kernelFor(const CqtConfig& cfg)
{
    static std::mutex mutex;
    static std::vector<std::shared_ptr<const CqtKernel>> cache;
    std::lock_guard lock(mutex);
    for (const auto& k : cache)
        if (k->config() == cfg)
            return k;
    cache.push_back(std::make_shared<const CqtKernel>(cfg));
    return cache.back();
}

CqtMatrix cqtMagnitude(const audio::AudioBuffer& buf, const CqtConfig& cfg)
{
    if (buf.sample_rate != cfg.sample_rate)
        throw ContractError("cqt: sample rate " + std::to_string(buf.sample_rate) + " does not match configured "
                            + std::to_string(cfg.sample_rate));
    if (buf.samples.empty())
        throw ContractError("cqt: empty audio");
    return kernelFor(cfg)->magnitudes(buf.samples);
}

void compressMagnitudes(CqtMatrix& m)
{
    float peak = 0.0f;
    for (float& v : m.magnitudes) {
        v = std::log1p(10.0f * v);
        peak = std::max(peak, v);
    }
    if (peak > 0.0f) {
        const float scale = 1.0f / peak;
        for (float& v : m.magnitudes)
            v *= scale;
    }
}

CqtMatrix cqt(const audio::AudioBuffer& buf, const CqtConfig& cfg)
{
    CqtMatrix m = cqtMagnitude(buf, cfg);
    compressMagnitudes(m);
    return m;
}

} // namespace nmp::spectral
