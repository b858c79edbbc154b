#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "audio/audio_buffer.hpp"

namespace nmp::spectral {

struct CqtConfig {
    int bins_per_semitone = 3;
    int hop_samples = 256;
    double base_frequency = 27.5;
    int n_bins = 340;
    int sample_rate = audio::kModelSampleRate;
    // Longest analysis kernel; low bins whose natural length exceeds it get a
    // wider bandwidth than the nominal Q.
    int max_kernel_length = 8192;
    // Bins centred above this fraction of Nyquist are forced to zero.
    double nyquist_guard = 0.98;
    // Spectral kernel coefficients below this fraction of the kernel peak are dropped.
    double sparsity = 1e-3;

    int binsPerOctave() const { return 12 * bins_per_semitone; }
    double binFrequency(double bin) const;
    double quality() const;
    double framePeriod() const { return double(hop_samples) / sample_rate; }
    bool operator==(const CqtConfig&) const = default;
};

// Frames x bins, row-major, one row per hop.
struct CqtMatrix {
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::vector<float> magnitudes;
    double frame_period = 0.0;

    float at(std::size_t t, std::size_t b) const { return magnitudes[t * bins + b]; }
    float& at(std::size_t t, std::size_t b) { return magnitudes[t * bins + b]; }
};

inline std::size_t cqtFrameCount(std::size_t samples, int hop)
{
    return (samples + std::size_t(hop) - 1) / std::size_t(hop);
}

// Frequency-domain kernel bank. Immutable after construction and safe to share
// across threads.
class CqtKernel {
public:
    explicit CqtKernel(const CqtConfig& cfg);
    ~CqtKernel();
    CqtKernel(const CqtKernel&) = delete;
    CqtKernel& operator=(const CqtKernel&) = delete;

    const CqtConfig& config() const { return mConfig; }
    int fftLength() const { return mFftLength; }
    // Natural time-domain kernel length for `bin` after capping (odd), or 0
    // when the bin lies above the Nyquist guard.
    int kernelLength(int bin) const { return mLengths[bin]; }

    // |X| for every frame; frames are centred at t*hop with zero padding
    // outside the signal.
    CqtMatrix magnitudes(const std::vector<double>& samples) const;

private:
    struct Band {
        int first = 0;
        std::vector<std::complex<double>> coeffs;
    };
    CqtConfig mConfig;
    int mFftLength = 0;
    std::vector<int> mLengths;
    std::vector<Band> mBands;
    struct Plan;
    std::unique_ptr<Plan> mPlan;
};

// Shared kernel for a configuration, built once per process.
std::shared_ptr<const CqtKernel> kernelFor(const CqtConfig& cfg);

// Raw |X| without compression or normalisation.
CqtMatrix cqtMagnitude(const audio::AudioBuffer& buf, const CqtConfig& cfg = {});

// Network front end: log(1 + 10|X|) scaled so the recording's maximum is 1.
CqtMatrix cqt(const audio::AudioBuffer& buf, const CqtConfig& cfg = {});

void compressMagnitudes(CqtMatrix& m);

} // namespace nmp::spectral
