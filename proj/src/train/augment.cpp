#include "train/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nmp::train {

std::uint64_t substreamSeed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Biquad Biquad::design(FilterType type, double frequency, double gainDb, double q, double sampleRate)
{
    const double a = std::pow(10.0, gainDb / 40.0);
    const double w0 = 2.0 * std::numbers::pi * frequency / sampleRate;
    const double cw = std::cos(w0);
    const double alpha = std::sin(w0) / (2.0 * q);
    double b0, b1, b2, a0, a1, a2;
    switch (type) {
    case FilterType::Peaking:
        b0 = 1 + alpha * a;
        b1 = -2 * cw;
        b2 = 1 - alpha * a;
        a0 = 1 + alpha / a;
        a1 = -2 * cw;
        a2 = 1 - alpha / a;
        break;
    case FilterType::LowShelf: {
        const double s = 2 * std::sqrt(a) * alpha;
        b0 = a * ((a + 1) - (a - 1) * cw + s);
        b1 = 2 * a * ((a - 1) - (a + 1) * cw);
        b2 = a * ((a + 1) - (a - 1) * cw - s);
        a0 = (a + 1) + (a - 1) * cw + s;
        a1 = -2 * ((a - 1) + (a + 1) * cw);
        a2 = (a + 1) + (a - 1) * cw - s;
        break;
    }
    case FilterType::HighShelf:
    default: {
        const double s = 2 * std::sqrt(a) * alpha;
        b0 = a * ((a + 1) + (a - 1) * cw + s);
        b1 = -2 * a * ((a - 1) + (a + 1) * cw);
        b2 = a * ((a + 1) + (a - 1) * cw - s);
        a0 = (a + 1) - (a - 1) * cw + s;
        a1 = 2 * ((a - 1) - (a + 1) * cw);
        a2 = (a + 1) - (a - 1) * cw - s;
        break;
    }
    }
    return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

void Biquad::apply(std::vector<double>& samples) const
{
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& s : samples) {
        const double x = s;
        const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1;
        x1 = x;
        y2 = y1;
        y1 = y;
        s = y;
    }
}

void addNoise(std::vector<double>& samples, double snrDb, Rng& rng)
{
    double power = 0.0;
    for (double s : samples)
        power += s * s;
    if (samples.empty() || power == 0.0)
        return;
    power /= double(samples.size());
    const double sigma = std::sqrt(power / std::pow(10.0, snrDb / 10.0));
    std::normal_distribution<double> dist(0.0, sigma);
    for (double& s : samples)
        s += dist(rng);
}

audio::AudioBuffer augment(const audio::AudioBuffer& in, Rng& rng, const AugmentConfig& cfg)
{
    audio::AudioBuffer out = in;
    if (cfg.eq) {
        std::uniform_int_distribution<int> pickType(0, 2);
        std::uniform_real_distribution<double> logFreq(std::log(100.0), std::log(8000.0));
        std::uniform_real_distribution<double> gain(-cfg.eq_max_gain_db, cfg.eq_max_gain_db);
        std::uniform_real_distribution<double> peakQ(0.5, 2.0);
        const auto type = FilterType(pickType(rng));
        const double f = std::exp(logFreq(rng));
        const double g = gain(rng);
        const double q = type == FilterType::Peaking ? peakQ(rng) : std::numbers::sqrt2 / 2.0;
        Biquad::design(type, std::min(f, 0.45 * in.sample_rate), g, q, in.sample_rate).apply(out.samples);
    }
    if (cfg.noise) {
        std::uniform_real_distribution<double> snr(cfg.snr_min_db, cfg.snr_max_db);
        addNoise(out.samples, snr(rng), rng);
    }
    for (double& s : out.samples)
        s = std::clamp(s, -1.0, 1.0);
    return out;
}

} // namespace nmp::train
