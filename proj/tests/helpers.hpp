#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here is deliberately written without reusing the library's own code paths
// where it serves as an oracle.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sartts/numerics.hpp"
#include "sartts/prosody.hpp"

namespace testutil {

inline std::filesystem::path tmp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("sartts_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Minimal WAV writer for fixtures. `bits` and `channels` are written into
// the header as-is so malformed-format cases can be produced.
inline void write_wav(const std::filesystem::path& path, const std::vector<std::int16_t>& samples,
                      std::uint32_t sample_rate, std::uint16_t channels = 1,
                      std::uint16_t bits = 16) {
    std::ofstream out(path, std::ios::binary);
    const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
    const std::uint32_t riff_len = 36 + data_len;
    auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
    out.write("RIFF", 4);
    u32(riff_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(1);  // PCM
    u16(channels);
    u32(sample_rate);
    u32(sample_rate * channels * bits / 8);
    u16(static_cast<std::uint16_t>(channels * bits / 8));
    u16(bits);
    out.write("data", 4);
    u32(data_len);
    for (std::int16_t s : samples) out.write(reinterpret_cast<const char*>(&s), 2);
}

inline std::vector<std::int16_t> sine_i16(double freq, double amplitude, std::uint32_t sample_rate,
                                          std::size_t n) {
    std::vector<std::int16_t> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = amplitude * std::sin(2.0 * std::numbers::pi * freq * i / sample_rate);
        s[i] = static_cast<std::int16_t>(std::lround(v * 32767.0));
    }
    return s;
}

inline sartts::Waveform sine_wave(double freq, double amplitude, int sample_rate, std::size_t n) {
    sartts::Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        w.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq * i / sample_rate);
    return w;
}

// Independent matmul oracle: plain triple loop with no early-outs.
inline sartts::Matrix matmul_oracle(const sartts::Matrix& a, const sartts::Matrix& b) {
    sartts::Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(k, j);
            c.at(i, j) = s;
        }
    return c;
}

// Singular values by one-sided Jacobi; good enough for toy-sized matrices.
inline std::vector<double> singular_values(const sartts::Matrix& m) {
    sartts::Matrix a = m.rows >= m.cols ? m : sartts::transpose(m);
    const std::size_t n = a.cols;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < a.rows; ++i) {
                    app += a.at(i, p) * a.at(i, p);
                    aqq += a.at(i, q) * a.at(i, q);
                    apq += a.at(i, p) * a.at(i, q);
                }
                off += std::abs(apq);
                if (std::abs(apq) < 1e-15) continue;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < a.rows; ++i) {
                    const double vp = a.at(i, p), vq = a.at(i, q);
                    a.at(i, p) = c * vp - s * vq;
                    a.at(i, q) = s * vp + c * vq;
                }
            }
        }
        if (off < 1e-14) break;
    }
    std::vector<double> sv(n);
    for (std::size_t p = 0; p < n; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) s += a.at(i, p) * a.at(i, p);
        sv[p] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline CliResult run_cli(const std::string& args) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto out_path = dir / "sartts_cli_stdout.txt";
    const auto err_path = dir / "sartts_cli_stderr.txt";
    const std::string cmd = std::string(SARTTS_CLI_PATH) + " " + args + " > " +
                            out_path.string() + " 2> " + err_path.string();
    const int rc = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WEXITSTATUS(rc);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

}  // namespace testutil
