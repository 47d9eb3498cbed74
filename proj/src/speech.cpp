#include "rcfm/speech.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "rcfm/random.hpp"

namespace rcfm {

void MfccConfig::validate() const {
    if (frame_len < 1 || frame_shift < 1) throw std::invalid_argument("mfcc: bad frame geometry");
    if (frame_shift > frame_len) throw std::invalid_argument("mfcc: frame shift exceeds frame length");
    if (n_filters < 1) throw std::invalid_argument("mfcc: need at least one filter");
    if (n_ceps < 1 || n_ceps > n_filters)
        throw std::invalid_argument("mfcc: cepstrum count must be in [1, n_filters]");
    if (log_floor <= 0.0) throw std::invalid_argument("mfcc: log floor must be positive");
    if (delta_width < 1) throw std::invalid_argument("mfcc: delta width must be at least 1");
}

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

Signal read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("wav: cannot open '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw std::invalid_argument("wav: not a RIFF/WAVE file: '" + path + "'");

    int sample_rate = 0;
    int channels = 0;
    int bits = 0;
    bool have_fmt = false;
    std::vector<double> samples;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
        const bool is_fmt = std::memcmp(bytes.data() + pos, "fmt ", 4) == 0;
        const bool is_data = std::memcmp(bytes.data() + pos, "data", 4) == 0;
        const std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size())
            throw std::invalid_argument("wav: truncated chunk in '" + path + "'");
        if (is_fmt) {
            if (chunk_size < 16) throw std::invalid_argument("wav: malformed fmt chunk");
            const int format = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            sample_rate = static_cast<int>(read_u32(bytes.data() + body + 4));
            bits = read_u16(bytes.data() + body + 14);
            if (format != 1) throw std::invalid_argument("wav: PCM format required");
            if (channels != 1) throw std::invalid_argument("wav: mono required");
            if (bits != 16) throw std::invalid_argument("wav: 16-bit samples required");
            have_fmt = true;
        } else if (is_data) {
            if (!have_fmt) throw std::invalid_argument("wav: data chunk before fmt chunk");
            const std::size_t count = chunk_size / 2;
            samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::uint16_t raw = read_u16(bytes.data() + body + 2 * i);
                samples[i] = static_cast<double>(static_cast<std::int16_t>(raw)) / 32768.0;
            }
            have_data = true;
        }
        pos = body + chunk_size + (chunk_size & 1);   // chunks are word-aligned
    }
    if (!have_fmt || !have_data)
        throw std::invalid_argument("wav: missing fmt or data chunk in '" + path + "'");
    return Signal{std::move(samples), sample_rate};
}

void write_wav(const Signal& signal, const std::string& path) {
    if (signal.sample_rate <= 0) throw std::invalid_argument("wav: bad sample rate");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("wav: cannot write '" + path + "'");
    const std::uint32_t data_size = static_cast<std::uint32_t>(signal.samples.size() * 2);
    auto put_u32 = [&out](std::uint32_t v) {
        const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                           static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
        out.write(b, 4);
    };
    auto put_u16 = [&out](std::uint16_t v) {
        const char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
        out.write(b, 2);
    };
    out.write("RIFF", 4);
    put_u32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1);    // PCM
    put_u16(1);    // mono
    put_u32(static_cast<std::uint32_t>(signal.sample_rate));
    put_u32(static_cast<std::uint32_t>(signal.sample_rate * 2));
    put_u16(2);    // block align
    put_u16(16);   // bits
    out.write("data", 4);
    put_u32(data_size);
    for (double s : signal.samples) {
        const double clamped = std::clamp(s, -1.0, 1.0);
        const int v = static_cast<int>(std::lround(clamped * 32767.0));
        put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix dct_matrix(std::size_t n) {
    Matrix d(n, n);
    const double scale = std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double row_scale = (i == 0) ? scale / std::numbers::sqrt2 : scale;
        for (std::size_t j = 0; j < n; ++j)
            d(i, j) = row_scale * std::cos(std::numbers::pi * static_cast<double>(i) *
                                           (2.0 * static_cast<double>(j) + 1.0) /
                                           (2.0 * static_cast<double>(n)));
    }
    return d;
}

MelFilterbank make_mel_filterbank(int n_filters, std::size_t nfft, int sample_rate) {
    if (n_filters < 1) throw std::invalid_argument("filterbank: need at least one filter");
    const std::size_t n_bins = nfft / 2 + 1;
    const double nyquist = static_cast<double>(sample_rate) / 2.0;
    const double mel_hi = hz_to_mel(nyquist);
    std::vector<double> edges(static_cast<std::size_t>(n_filters) + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(n_filters + 1));

    MelFilterbank fb;
    fb.weights = Matrix(static_cast<std::size_t>(n_filters), n_bins, 0.0);
    fb.center_hz.resize(static_cast<std::size_t>(n_filters));
    const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(nfft);
    for (int f = 0; f < n_filters; ++f) {
        const double lo = edges[static_cast<std::size_t>(f)];
        const double mid = edges[static_cast<std::size_t>(f) + 1];
        const double hi = edges[static_cast<std::size_t>(f) + 2];
        fb.center_hz[static_cast<std::size_t>(f)] = mid;
        for (std::size_t b = 0; b < n_bins; ++b) {
            const double hz = static_cast<double>(b) * bin_hz;
            double w = 0.0;
            if (hz >= lo && hz <= mid && mid > lo) {
                w = (hz - lo) / (mid - lo);
            } else if (hz > mid && hz <= hi && hi > mid) {
                w = (hi - hz) / (hi - mid);
            }
            fb.weights(static_cast<std::size_t>(f), b) = w;
        }
    }
    return fb;
}

namespace {

/// In-place iterative radix-2 FFT; n must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace

Matrix mfcc(const Signal& signal, const MfccConfig& cfg) {
    cfg.validate();
    const std::size_t n = signal.samples.size();
    const std::size_t frame_len = static_cast<std::size_t>(cfg.frame_len);
    const std::size_t shift = static_cast<std::size_t>(cfg.frame_shift);
    if (n < frame_len) throw std::invalid_argument("mfcc: signal shorter than one frame");
    const std::size_t n_frames = (n - frame_len) / shift + 1;

    const std::size_t nfft = std::bit_ceil(frame_len);
    const std::size_t n_bins = nfft / 2 + 1;
    const MelFilterbank fb = make_mel_filterbank(cfg.n_filters, nfft, signal.sample_rate);
    const Matrix dct = dct_matrix(static_cast<std::size_t>(cfg.n_filters));

    std::vector<double> window(frame_len);
    for (std::size_t i = 0; i < frame_len; ++i)
        window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                           static_cast<double>(frame_len - 1));

    Matrix out(n_frames, static_cast<std::size_t>(cfg.n_ceps));
    std::vector<std::complex<double>> buf(nfft);
    std::vector<double> mag(n_bins);
    std::vector<double> logmel(static_cast<std::size_t>(cfg.n_filters));
    for (std::size_t t = 0; t < n_frames; ++t) {
        const std::size_t start = t * shift;
        // pre-emphasis applied within the frame, so frames depend only on
        // their own samples
        for (std::size_t i = 0; i < frame_len; ++i) {
            const double x = signal.samples[start + i];
            const double prev = (i == 0) ? 0.0 : signal.samples[start + i - 1] * cfg.pre_emphasis;
            buf[i] = {(x - prev) * window[i], 0.0};
        }
        for (std::size_t i = frame_len; i < nfft; ++i) buf[i] = {0.0, 0.0};
        fft_radix2(buf);
        for (std::size_t b = 0; b < n_bins; ++b) mag[b] = std::abs(buf[b]);
        for (int f = 0; f < cfg.n_filters; ++f) {
            double e = 0.0;
            for (std::size_t b = 0; b < n_bins; ++b)
                e += fb.weights(static_cast<std::size_t>(f), b) * mag[b];
            logmel[static_cast<std::size_t>(f)] = std::log(std::max(e, cfg.log_floor));
        }
        for (int c = 0; c < cfg.n_ceps; ++c) {
            double s = 0.0;
            for (int f = 0; f < cfg.n_filters; ++f)
                s += dct(static_cast<std::size_t>(c), static_cast<std::size_t>(f)) *
                     logmel[static_cast<std::size_t>(f)];
            out(t, static_cast<std::size_t>(c)) = s;
        }
    }
    return out;
}

Matrix add_deltas(const Matrix& frames, int width) {
    if (width < 1) throw std::invalid_argument("deltas: width must be at least 1");
    if (frames.rows() == 0) throw std::invalid_argument("deltas: no frames");
    const std::size_t t_count = frames.rows(), dim = frames.cols();
    double norm = 0.0;
    for (int tau = 1; tau <= width; ++tau) norm += static_cast<double>(tau) * tau;
    norm *= 2.0;

    auto regression = [&](const Matrix& src) {
        Matrix d(t_count, dim);
        const auto clamp_t = [&](long t) {
            return static_cast<std::size_t>(std::clamp<long>(t, 0, static_cast<long>(t_count) - 1));
        };
        for (std::size_t t = 0; t < t_count; ++t)
            for (std::size_t j = 0; j < dim; ++j) {
                double s = 0.0;
                for (int tau = 1; tau <= width; ++tau)
                    s += static_cast<double>(tau) *
                         (src(clamp_t(static_cast<long>(t) + tau), j) -
                          src(clamp_t(static_cast<long>(t) - tau), j));
                d(t, j) = s / norm;
            }
        return d;
    };

    const Matrix d1 = regression(frames);
    const Matrix d2 = regression(d1);
    Matrix out(t_count, dim * 3);
    for (std::size_t t = 0; t < t_count; ++t)
        for (std::size_t j = 0; j < dim; ++j) {
            out(t, j) = frames(t, j);
            out(t, dim + j) = d1(t, j);
            out(t, 2 * dim + j) = d2(t, j);
        }
    return out;
}

std::vector<double> pool_utterance(const Matrix& frames) {
    if (frames.rows() == 0) throw std::invalid_argument("pool: no frames");
    std::vector<double> mean(frames.cols(), 0.0);
    for (std::size_t t = 0; t < frames.rows(); ++t)
        for (std::size_t j = 0; j < frames.cols(); ++j) mean[j] += frames(t, j);
    for (double& v : mean) v /= static_cast<double>(frames.rows());
    return mean;
}

namespace {

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

MixResult mix_at_snr(const Signal& speech, const Signal& noise, double snr_db, std::uint64_t seed) {
    if (speech.samples.empty() || noise.samples.empty())
        throw std::invalid_argument("mix: empty signal");
    if (speech.sample_rate != noise.sample_rate)
        throw std::invalid_argument("mix: sample rate mismatch");
    const std::size_t n = speech.samples.size();

    Rng rng(seed);
    std::vector<double> segment(n);
    if (noise.samples.size() >= n) {
        const std::size_t offset = rng.index(noise.samples.size() - n + 1);
        std::copy_n(noise.samples.begin() + static_cast<long>(offset), n, segment.begin());
    } else {
        const std::size_t offset = rng.index(noise.samples.size());
        for (std::size_t i = 0; i < n; ++i)
            segment[i] = noise.samples[(offset + i) % noise.samples.size()];
    }

    const double speech_rms = rms(speech.samples);
    const double segment_rms = rms(segment);
    if (speech_rms == 0.0) throw std::invalid_argument("mix: silent speech");
    if (segment_rms == 0.0) throw std::invalid_argument("mix: silent noise");
    const double gain = speech_rms / (segment_rms * std::pow(10.0, snr_db / 20.0));

    MixResult result;
    result.gain = gain;
    result.speech_component = speech;
    result.noise_component.sample_rate = speech.sample_rate;
    result.noise_component.samples.resize(n);
    result.mixed.sample_rate = speech.sample_rate;
    result.mixed.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double scaled = gain * segment[i];
        result.noise_component.samples[i] = scaled;
        const double mixed = speech.samples[i] + scaled;
        const double clamped = std::clamp(mixed, -1.0, 1.0);
        if (clamped != mixed) ++result.clipped;
        result.mixed.samples[i] = clamped;
    }
    return result;
}

double measure_snr(const Signal& speech, const Signal& noise_component) {
    if (speech.samples.size() != noise_component.samples.size())
        throw std::invalid_argument("snr: length mismatch");
    if (speech.samples.empty()) throw std::invalid_argument("snr: empty signal");
    double ps = 0.0, pn = 0.0;
    for (double x : speech.samples) ps += x * x;
    for (double x : noise_component.samples) pn += x * x;
    if (ps == 0.0 || pn == 0.0) throw std::invalid_argument("snr: silent input");
    return 10.0 * std::log10(ps / pn);
}

}  // namespace rcfm
