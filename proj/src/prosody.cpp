#include "sartts/prosody.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>

#include "sartts/errors.hpp"

namespace sartts {

namespace {

constexpr double kLogFloor = 1e-10;

std::uint32_t rd_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = x[i + k];
                const auto v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filterbank over FFT bins [0, n_fft/2], spanning 0..sr/2.
Matrix mel_filterbank(std::size_t n_mels, std::size_t n_fft, int sample_rate) {
    const std::size_t n_bins = n_fft / 2 + 1;
    const double mel_max = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));

    Matrix fb(n_mels, n_bins);
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        for (std::size_t b = 0; b < n_bins; ++b) {
            const double f = static_cast<double>(b) * sample_rate / static_cast<double>(n_fft);
            if (f > lo && f < mid)
                fb.at(m, b) = (f - lo) / (mid - lo);
            else if (f >= mid && f < hi)
                fb.at(m, b) = (hi - f) / (hi - mid);
        }
    }
    return fb;
}

// Orthonormal DCT-II basis, n_ceps x n_mels.
Matrix dct_basis(std::size_t n_ceps, std::size_t n_mels) {
    Matrix d(n_ceps, n_mels);
    const double n = static_cast<double>(n_mels);
    for (std::size_t k = 0; k < n_ceps; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
        for (std::size_t m = 0; m < n_mels; ++m)
            d.at(k, m) = scale * std::cos(std::numbers::pi / n * (m + 0.5) * k);
    }
    return d;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    sd = std::sqrt(var / static_cast<double>(v.size()));  // population std
}

}  // namespace

std::size_t frame_count(std::size_t len, const FrameSpec& spec) {
    if (spec.hop == 0 || spec.hop > spec.frame_len)
        throw ParameterError("frame spec requires 0 < hop <= frame_len");
    if (len < spec.frame_len)
        throw EmptyInputError("waveform shorter than one frame");
    return (len - spec.frame_len) / spec.hop + 1;
}

Waveform read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

    if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw FormatError(path.string() + ": not a RIFF WAVE file");

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    const char* data = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t chunk_len = rd_u32(p + pos + 4);
        if (pos + 8 + chunk_len > bytes.size())
            throw FormatError(path.string() + ": truncated chunk");
        if (std::memcmp(p + pos, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw FormatError(path.string() + ": short fmt chunk");
            format = rd_u16(p + pos + 8);
            channels = rd_u16(p + pos + 10);
            sample_rate = rd_u32(p + pos + 12);
            bits = rd_u16(p + pos + 22);
            have_fmt = true;
        } else if (std::memcmp(p + pos, "data", 4) == 0) {
            data = bytes.data() + pos + 8;
            data_len = chunk_len;
        }
        pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data == nullptr)
        throw FormatError(path.string() + ": missing fmt or data chunk");
    if (channels != 1)
        throw UnsupportedChannelsError(path.string() + ": expected mono, found " +
                                       std::to_string(channels) + " channels");
    if (format != 1 || bits != 16)
        throw UnsupportedFormatError(path.string() + ": expected 16-bit PCM");
    if (sample_rate == 0) throw FormatError(path.string() + ": zero sample rate");

    Waveform w;
    w.sample_rate = static_cast<int>(sample_rate);
    w.samples.reserve(data_len / 2);
    for (std::size_t i = 0; i + 1 < data_len; i += 2) {
        std::int16_t s;
        std::memcpy(&s, data + i, 2);
        w.samples.push_back(static_cast<double>(s) / 32768.0);
    }
    if (w.samples.empty()) throw FormatError(path.string() + ": empty data chunk");
    return w;
}

FrameFeatures frame_energy(const Waveform& w, const FrameSpec& spec) {
    const std::size_t n = frame_count(w.samples.size(), spec);
    Matrix out(n, 1);
    for (std::size_t f = 0; f < n; ++f) {
        double s = 0.0;
        for (std::size_t i = 0; i < spec.frame_len; ++i) {
            const double x = w.samples[f * spec.hop + i];
            s += x * x;
        }
        out.at(f, 0) = std::sqrt(s / static_cast<double>(spec.frame_len));
    }
    return {out};
}

F0Track estimate_f0(const Waveform& w, const FrameSpec& spec, double f0_min, double f0_max,
                    double voicing_threshold) {
    if (f0_min <= 0.0 || f0_min >= f0_max)
        throw ParameterError("estimate_f0 requires 0 < f0_min < f0_max");
    if (static_cast<double>(w.sample_rate) / f0_min > static_cast<double>(spec.frame_len))
        throw ParameterError("frame too short for f0_min: no full period fits");

    const std::size_t n = frame_count(w.samples.size(), spec);
    const auto lag_min = static_cast<std::size_t>(
        std::ceil(static_cast<double>(w.sample_rate) / f0_max));
    const auto lag_max = std::min<std::size_t>(
        static_cast<std::size_t>(std::floor(static_cast<double>(w.sample_rate) / f0_min)),
        spec.frame_len - 1);
    if (lag_min < 1 || lag_min > lag_max) throw ParameterError("empty lag search band");

    F0Track track;
    track.frames.resize(n);
    std::vector<double> x(spec.frame_len);
    for (std::size_t f = 0; f < n; ++f) {
        double mean = 0.0;
        for (std::size_t i = 0; i < spec.frame_len; ++i) mean += w.samples[f * spec.hop + i];
        mean /= static_cast<double>(spec.frame_len);
        for (std::size_t i = 0; i < spec.frame_len; ++i)
            x[i] = w.samples[f * spec.hop + i] - mean;

        std::vector<double> corr(lag_max + 1, -2.0);
        double best = -1.0;
        for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
            double num = 0.0, e0 = 0.0, e1 = 0.0;
            for (std::size_t i = 0; i + lag < spec.frame_len; ++i) {
                num += x[i] * x[i + lag];
                e0 += x[i] * x[i];
                e1 += x[i + lag] * x[i + lag];
            }
            if (e0 <= 0.0 || e1 <= 0.0) continue;
            corr[lag] = num / std::sqrt(e0 * e1);
            best = std::max(best, corr[lag]);
        }
        // lag multiples of the true period score near-identically; take the
        // smallest lag within a small margin of the peak to avoid octave drops
        std::size_t best_lag = 0;
        for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
            if (corr[lag] >= best - 3e-3) {
                best_lag = lag;
                break;
            }
        }
        if (best_lag != 0 && best >= voicing_threshold) {
            track.frames[f].voiced = true;
            track.frames[f].f0 = static_cast<double>(w.sample_rate) / static_cast<double>(best_lag);
        }
    }
    return track;
}

FrameFeatures mel_cepstra(const Waveform& w, const FrameSpec& spec, std::size_t n_mels,
                          std::size_t n_ceps) {
    if (n_ceps == 0 || n_ceps > n_mels)
        throw ParameterError("mel_cepstra requires 0 < n_ceps <= n_mels");
    const std::size_t n = frame_count(w.samples.size(), spec);
    // frames shorter than the transform length are zero-padded
    const std::size_t n_fft = next_pow2(spec.frame_len);
    const std::size_t n_bins = n_fft / 2 + 1;

    std::vector<double> window(spec.frame_len);
    for (std::size_t i = 0; i < spec.frame_len; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i /
                                         static_cast<double>(spec.frame_len - 1));

    const Matrix fb = mel_filterbank(n_mels, n_fft, w.sample_rate);
    const Matrix dct = dct_basis(n_ceps, n_mels);

    Matrix out(n, n_ceps);
    std::vector<std::complex<double>> buf(n_fft);
    for (std::size_t f = 0; f < n; ++f) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0));
        for (std::size_t i = 0; i < spec.frame_len; ++i)
            buf[i] = w.samples[f * spec.hop + i] * window[i];
        fft(buf);

        Matrix spectrum(n_bins, 1);
        for (std::size_t b = 0; b < n_bins; ++b) spectrum.at(b, 0) = std::abs(buf[b]);

        const Matrix mel = matmul(fb, spectrum);  // n_mels x 1
        Matrix logmel(n_mels, 1);
        for (std::size_t m = 0; m < n_mels; ++m)
            logmel.at(m, 0) = std::log(std::max(mel.at(m, 0), kLogFloor));

        const Matrix ceps = matmul(dct, logmel);  // n_ceps x 1
        for (std::size_t c = 0; c < n_ceps; ++c) out.at(f, c) = ceps.at(c, 0);
    }
    return {out};
}

ProsodyEmbedding pool_frames(const FrameFeatures& f) {
    if (f.n_frames() == 0) throw EmptyInputError("pool_frames: zero frames");
    return {mean_pool_rows(f.values)};
}

ProsodyReport prosody_stats(const F0Track& f0, const FrameFeatures& energy) {
    if (energy.n_frames() == 0) throw EmptyInputError("prosody_stats: no energy frames");
    ProsodyReport rep;

    std::vector<double> voiced;
    for (const auto& fr : f0.frames)
        if (fr.voiced) voiced.push_back(fr.f0);
    rep.voiced_count = voiced.size();
    if (!voiced.empty()) {
        double m, s;
        mean_std(voiced, m, s);
        rep.pitch_mean = m;
        rep.pitch_std = s;
    }

    std::vector<double> e(energy.values.data);
    mean_std(e, rep.energy_mean, rep.energy_std);
    return rep;
}

}  // namespace sartts
