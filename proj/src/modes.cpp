#include "oam/modes.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace oam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double wrap_phase(double arg) {
    // std::arg returns (-pi, pi]; map into [0, 2pi)
    double p = arg < 0.0 ? arg + kTwoPi : arg;
    if (p >= kTwoPi) p -= kTwoPi;
    return p;
}

}  // namespace

int ModeRange::index(int m) const {
    if (!contains(m))
        throw DomainError("ModeRange: mode " + std::to_string(m) + " outside [" +
                          std::to_string(m_min) + ", " + std::to_string(m_max) + "]");
    return m - m_min;
}

ModeRange make_mode_range(int m_min, int m_max) {
    if (m_min > m_max)
        throw DomainError("ModeRange: m_min must not exceed m_max");
    return ModeRange{m_min, m_max};
}

Complex lg_amplitude(int m, double r, double phi, double w0) {
    if (r < 0.0) throw DomainError("lg_amplitude: r must be non-negative");
    if (w0 <= 0.0) throw DomainError("lg_amplitude: waist must be positive");
    const int am = std::abs(m);
    const double norm = std::sqrt(2.0 / (std::numbers::pi * factorial(am))) / w0;
    const double radial =
        norm * std::pow(r * std::numbers::sqrt2 / w0, am) * std::exp(-r * r / (w0 * w0));
    return radial * std::polar(1.0, m * phi);
}

FieldGrid render_superposition(int m1, int m2, Complex alpha, Complex beta,
                               const FieldGridSpec& spec) {
    if (spec.size < 2) throw DomainError("FieldGridSpec: size must be at least 2");
    if (spec.extent <= 0.0) throw DomainError("FieldGridSpec: extent must be positive");
    FieldGrid grid;
    grid.size = spec.size;
    grid.extent = spec.extent;
    grid.values.resize(static_cast<size_t>(spec.size) * spec.size);
    const double half = spec.extent * spec.waist;
    const double step = 2.0 * half / spec.size;
    for (int row = 0; row < spec.size; ++row) {
        const double y = half - (row + 0.5) * step;  // top row = +y
        for (int col = 0; col < spec.size; ++col) {
            const double x = -half + (col + 0.5) * step;
            const double r = std::hypot(x, y);
            const double phi = std::atan2(y, x);
            grid.values[row * spec.size + col] =
                alpha * lg_amplitude(m1, r, phi, spec.waist) +
                beta * lg_amplitude(m2, r, phi, spec.waist);
        }
    }
    return grid;
}

PhaseMask phase_mask_of_field(const FieldGrid& field) {
    PhaseMask mask;
    mask.size = field.size;
    mask.extent = field.extent;
    mask.phase.resize(field.values.size());
    mask.flagged.resize(field.values.size(), 0);
    for (size_t i = 0; i < field.values.size(); ++i) {
        const Complex v = field.values[i];
        if (v.real() == 0.0 && v.imag() == 0.0) {
            mask.phase[i] = 0.0;
            mask.flagged[i] = 1;
        } else {
            mask.phase[i] = wrap_phase(std::arg(v));
        }
    }
    return mask;
}

PhaseMask superposition_phase_mask(int m1, int m2, double theta,
                                   const FieldGridSpec& spec) {
    return phase_mask_of_field(
        render_superposition(m1, m2, 1.0, std::polar(1.0, theta), spec));
}

SubspaceBasis mub_basis(int m, int n, char label) {
    if (m == n) throw DomainError("mub_basis: modes must differ");
    const double s2 = 1.0 / std::numbers::sqrt2;
    SubspaceBasis b;
    b.m = m;
    b.n = n;
    b.label = label;
    switch (label) {
        case 'z':
            b.plus = {Complex(1.0), Complex(0.0)};
            b.minus = {Complex(0.0), Complex(1.0)};
            break;
        case 'x':
            b.plus = {Complex(s2), Complex(s2)};
            b.minus = {Complex(s2), Complex(-s2)};
            break;
        case 'y':
            b.plus = {Complex(s2), Complex(0.0, s2)};
            b.minus = {Complex(s2), Complex(0.0, -s2)};
            break;
        default:
            throw DomainError("mub_basis: label must be one of x, y, z");
    }
    return b;
}

PureState embed_pair_state(const std::array<Complex, 2>& coeffs, int m, int n,
                           const ModeRange& range) {
    Vector v = Vector::Zero(range.size());
    v(range.index(m)) = coeffs[0];
    v(range.index(n)) = coeffs[1];
    return PureState(std::move(v));
}

std::array<PureState, 9> qutrit_tomo_states() {
    const double s2 = 1.0 / std::numbers::sqrt2;
    const Complex i(0.0, 1.0);
    auto mk = [](Complex l, Complex g, Complex r) {
        Vector v(3);
        v << l, g, r;
        return PureState(std::move(v));
    };
    return {
        mk(1, 0, 0),           // |L>
        mk(0, 1, 0),           // |G>
        mk(0, 0, 1),           // |R>
        mk(s2, s2, 0),         // (|G>+|L>)/s2
        mk(0, s2, s2),         // (|G>+|R>)/s2
        mk(i * s2, s2, 0),     // (|G>+i|L>)/s2
        mk(0, s2, -i * s2),    // (|G>-i|R>)/s2
        mk(s2, 0, s2),         // (|L>+|R>)/s2
        mk(s2, 0, i * s2),     // (|L>+i|R>)/s2
    };
}

void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != static_cast<size_t>(width) * height)
        throw DomainError("write_pgm: pixel count does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_pgm: cannot open " + path);
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw Error("write_pgm: write failed for " + path);
}

std::vector<std::uint8_t> phase_to_bytes(const PhaseMask& mask) {
    std::vector<std::uint8_t> bytes(mask.phase.size());
    for (size_t i = 0; i < mask.phase.size(); ++i) {
        const int v = static_cast<int>(mask.phase[i] / kTwoPi * 256.0);
        bytes[i] = static_cast<std::uint8_t>(std::min(v, 255));
    }
    return bytes;
}

std::vector<std::uint8_t> intensity_to_bytes(const FieldGrid& field) {
    double peak = 0.0;
    for (const Complex& v : field.values) peak = std::max(peak, std::norm(v));
    std::vector<std::uint8_t> bytes(field.values.size(), 0);
    if (peak == 0.0) return bytes;
    for (size_t i = 0; i < field.values.size(); ++i) {
        const int v = static_cast<int>(std::norm(field.values[i]) / peak * 255.0 + 0.5);
        bytes[i] = static_cast<std::uint8_t>(std::min(v, 255));
    }
    return bytes;
}

}  // namespace oam
