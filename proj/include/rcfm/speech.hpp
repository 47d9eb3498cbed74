#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcfm/matrix.hpp"

namespace rcfm {

struct Signal {
    std::vector<double> samples;   // in [-1, 1]
    int sample_rate = 8000;
};

struct MfccConfig {
    int frame_len = 200;        // 25 ms at 8 kHz
    int frame_shift = 80;       // 10 ms
    int n_filters = 23;
    int n_ceps = 13;            // including c0
    double pre_emphasis = 0.97;
    double log_floor = 1e-10;
    int delta_width = 2;

    void validate() const;
};

/// 16-bit mono PCM RIFF/WAVE reader; samples are raw values over 32768.
Signal read_wav(const std::string& path);

/// Writes 16-bit mono PCM; samples are clamped to [-1, 1].
void write_wav(const Signal& signal, const std::string& path);

/// T x n_ceps cepstra: per-frame pre-emphasis, Hamming window, power-of-two
/// DFT, triangular mel filterbank to Nyquist, floored log, orthonormal DCT-II.
/// T = floor((N - frame_len) / frame_shift) + 1.
Matrix mfcc(const Signal& signal, const MfccConfig& cfg);

/// Appends regression deltas and delta-deltas (edge frames replicated):
/// output columns are [static | delta | delta-delta].
Matrix add_deltas(const Matrix& frames, int width);

/// Coordinate-wise mean over frames.
std::vector<double> pool_utterance(const Matrix& frames);

struct MixResult {
    Signal mixed;
    Signal speech_component;   // the input speech
    Signal noise_component;    // gain-scaled noise segment
    double gain = 0.0;
    std::size_t clipped = 0;   // samples clamped to [-1, 1]
};

/// speech + g * noise_segment with g chosen so the segment sits snr_db below
/// the speech. A too-short noise signal is tiled from a seeded offset;
/// otherwise the seeded offset picks the segment.
MixResult mix_at_snr(const Signal& speech, const Signal& noise, double snr_db, std::uint64_t seed);

/// 10 log10(sum speech^2 / sum noise^2).
double measure_snr(const Signal& speech, const Signal& noise_component);

/// n x n orthonormal DCT-II matrix (row i applied to a length-n vector).
Matrix dct_matrix(std::size_t n);

struct MelFilterbank {
    Matrix weights;                   // n_filters x (nfft/2 + 1)
    std::vector<double> center_hz;    // n_filters
};

MelFilterbank make_mel_filterbank(int n_filters, std::size_t nfft, int sample_rate);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

}  // namespace rcfm
