#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "sartts/numerics.hpp"

namespace sartts {

struct Waveform {
    int sample_rate = 0;              // Hz
    std::vector<double> samples;      // mono, in [-1, 1]
};

struct FrameSpec {
    std::size_t frame_len = 512;
    std::size_t hop = 160;
};

// Frame-level feature matrix, one row per frame.
struct FrameFeatures {
    Matrix values;  // n_frames x dim

    std::size_t n_frames() const { return values.rows; }
    std::size_t dim() const { return values.cols; }
};

struct F0Frame {
    bool voiced = false;
    double f0 = 0.0;  // Hz, defined only when voiced
};

struct F0Track {
    std::vector<F0Frame> frames;
};

// Fixed-length pooled prosody vector.
struct ProsodyEmbedding {
    Vector values;

    std::size_t dim() const { return values.dim; }
};

struct ProsodyReport {
    std::size_t voiced_count = 0;
    std::optional<double> pitch_mean;  // absent when no voiced frames
    std::optional<double> pitch_std;   // population std
    double energy_mean = 0.0;
    double energy_std = 0.0;
};

// frames = floor((len - frame_len)/hop) + 1; requires len >= frame_len.
std::size_t frame_count(std::size_t len, const FrameSpec& spec);

// RIFF WAVE, 16-bit PCM, mono. Sample s maps to s/32768.
Waveform read_wav(const std::filesystem::path& path);

// Per-frame RMS amplitude, dim 1.
FrameFeatures frame_energy(const Waveform& w, const FrameSpec& spec);

// Normalized autocorrelation over lags [sr/f0_max, sr/f0_min]; frames whose
// peak falls below voicing_threshold are marked unvoiced.
F0Track estimate_f0(const Waveform& w, const FrameSpec& spec, double f0_min, double f0_max,
                    double voicing_threshold = 0.3);

// Hann window -> magnitude spectrum -> triangular mel filterbank -> log with
// floor 1e-10 -> orthonormal DCT-II, first n_ceps coefficients (index 0 = c0).
FrameFeatures mel_cepstra(const Waveform& w, const FrameSpec& spec, std::size_t n_mels = 40,
                          std::size_t n_ceps = 13);

ProsodyEmbedding pool_frames(const FrameFeatures& f);

ProsodyReport prosody_stats(const F0Track& f0, const FrameFeatures& energy);

}  // namespace sartts
