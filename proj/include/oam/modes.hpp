#ifndef OAM_MODES_HPP
#define OAM_MODES_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "oam/states.hpp"

namespace oam {

// Contiguous interval of azimuthal mode indices, ascending.
struct ModeRange {
    int m_min;
    int m_max;

    int size() const { return m_max - m_min + 1; }
    bool contains(int m) const { return m >= m_min && m <= m_max; }
    int index(int m) const;  // position of |m> in the ascending basis
    int mode_at(int i) const { return m_min + i; }
};

ModeRange make_mode_range(int m_min, int m_max);

// Laguerre-Gaussian amplitude, radial order p = 0, waist plane. Normalized so
// the squared modulus integrates to one over the transverse plane.
Complex lg_amplitude(int m, double r, double phi, double w0 = 1.0);

struct FieldGridSpec {
    int size = 512;       // pixels per side
    double extent = 3.0;  // physical half-width, in units of the beam waist
    double waist = 1.0;
};

// Sampled complex field over a square grid, row-major, pixel centers.
struct FieldGrid {
    int size = 0;
    double extent = 0.0;
    std::vector<Complex> values;

    Complex at(int row, int col) const { return values[row * size + col]; }
};

// alpha*LG_{m1} + beta*LG_{m2} sampled on the grid.
FieldGrid render_superposition(int m1, int m2, Complex alpha, Complex beta,
                               const FieldGridSpec& spec);

// Per-pixel Arg(LG_{m1} + e^{i theta} LG_{m2}), wrapped to [0, 2pi). Pixels where
// the field vanishes identically get phase 0 and are flagged.
struct PhaseMask {
    int size = 0;
    double extent = 0.0;
    std::vector<double> phase;         // [0, 2pi)
    std::vector<std::uint8_t> flagged;  // 1 where both amplitudes were exactly 0
};

PhaseMask superposition_phase_mask(int m1, int m2, double theta,
                                   const FieldGridSpec& spec = {});
PhaseMask phase_mask_of_field(const FieldGrid& field);

// Two orthonormal superpositions of |m> and |n> forming one of the three
// mutually unbiased qubit bases:
//   z: {|m>, |n>}    x: {(|m>+|n>)/sqrt2, (|m>-|n>)/sqrt2}
//   y: {(|m>+i|n>)/sqrt2, (|m>-i|n>)/sqrt2}
struct SubspaceBasis {
    int m = 0;
    int n = 0;
    char label = 'z';
    std::array<Complex, 2> plus;   // coefficients on (|m>, |n>)
    std::array<Complex, 2> minus;
};

SubspaceBasis mub_basis(int m, int n, char label);

// The basis state embedded into the full mode-range space.
PureState embed_pair_state(const std::array<Complex, 2>& coeffs, int m, int n,
                           const ModeRange& range);

// The nine single-photon projection states used for qutrit tomography, over the
// basis (|L>, |G>, |R>) = (m=-1, 0, +1), in the fixed order:
//   L, G, R, (G+L)/s2, (G+R)/s2, (G+iL)/s2, (G-iR)/s2, (L+R)/s2, (L+iR)/s2
std::array<PureState, 9> qutrit_tomo_states();

// 8-bit binary PGM (P5). Phase maps [0, 2pi) -> [0, 255] linearly; intensity is
// max-normalized.
void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& pixels);
std::vector<std::uint8_t> phase_to_bytes(const PhaseMask& mask);
std::vector<std::uint8_t> intensity_to_bytes(const FieldGrid& field);

}  // namespace oam

#endif
