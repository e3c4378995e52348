#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "pmc/types.hpp"

namespace pmc {

using Complex = std::complex<double>;

/// Uniform Cartesian grid on [-R, R]² with an odd point count, so the origin
/// is a grid point. R = 1.2 leaves room for compactly extended potentials.
struct ComplexGrid {
    int n = 0;          // points per side
    double radius = 1.2;
    double spacing = 0.0;

    static ComplexGrid with_spacing(double target_spacing, double radius = 1.2);

    Complex point(int ix, int iy) const {
        return {-radius + ix * spacing, -radius + iy * spacing};
    }
    int size() const { return n * n; }
};

struct ComplexGridField {
    ComplexGrid grid;
    std::vector<Complex> v;  // row-major, index ix*n + iy

    Complex& at(int ix, int iy) { return v[static_cast<size_t>(ix) * grid.n + iy]; }
    Complex at(int ix, int iy) const { return v[static_cast<size_t>(ix) * grid.n + iy]; }
};

ComplexGridField make_field(const ComplexGrid& grid);

template <typename F>
ComplexGridField sample_field(const ComplexGrid& grid, F&& f) {
    ComplexGridField out = make_field(grid);
    for (int ix = 0; ix < grid.n; ++ix)
        for (int iy = 0; iy < grid.n; ++iy) out.at(ix, iy) = f(grid.point(ix, iy));
    return out;
}

/// L² norm over the unit disk (the measurement domain).
double l2_disk(const ComplexGridField& f);
/// L^p norm over the unit disk.
double lp_disk(const ComplexGridField& f, double p);

/// Smooth radial cutoff: 1 for |z| ≤ r_on, 0 for |z| ≥ r_off, C^∞ in between.
double smooth_cutoff(double r, double r_on = 0.95, double r_off = 1.08);

enum class PhaseKind { holomorphic, antiholomorphic };

/// Polynomial phase. The holomorphic kind contributes exp(Φ/h); the
/// antiholomorphic kind contributes exp(-conj(Φ)/h). Either way ψ = Im Φ.
struct CGOPhase {
    PhaseKind kind = PhaseKind::holomorphic;
    std::vector<Complex> coeffs;          // Φ(z) = Σ coeffs[k] z^k
    std::vector<Complex> critical_points; // roots of Φ'

    Complex phi(Complex z) const;
    Complex dphi(Complex z) const;
    Complex ddphi(Complex z) const;
    /// Exponent of the oscillatory prefactor at z (already divided by... no: times 1/h by caller).
    Complex exponent(Complex z) const;
    double psi(Complex z) const { return phi(z).imag(); }
    bool has_critical_point() const { return !critical_points.empty(); }
};

/// Φ(z) = (z-z0)²/2 when z0 is given (Morse with the single critical point
/// z0), Φ(z) = z otherwise (no critical points). z0 must lie strictly inside
/// the unit disk.
CGOPhase make_phase(PhaseKind kind, const std::optional<Complex>& z0 = {});

/// Critical points of ±Ψ + Φ; the combination is admissible when every root
/// stays outside the closed unit disk.
struct PhaseCombinationCheck {
    std::vector<Complex> plus_roots;   // critical points of +Ψ + Φ
    std::vector<Complex> minus_roots;  // of -Ψ + Φ
    bool pass = false;
};
PhaseCombinationCheck check_phase_combination(const CGOPhase& psi_phase, const CGOPhase& phi_phase);

/// Discrete solid Cauchy transform (∂̄)^{-1} with kernel 1/(π(z-w)); the
/// adjoint flag switches to the conjugate kernel, a right inverse of ∂.
/// Midpoint quadrature with the singular cell dropped (its exact integral
/// over a centered square is zero); convolution through FFT.
class CauchyTransform {
  public:
    explicit CauchyTransform(const ComplexGrid& grid);
    ~CauchyTransform();
    CauchyTransform(const CauchyTransform&) = delete;
    CauchyTransform& operator=(const CauchyTransform&) = delete;

    ComplexGridField apply(const ComplexGridField& f, bool adjoint = false) const;
    const ComplexGrid& grid() const { return grid_; }

  private:
    ComplexGrid grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

enum class ConjugatedFlavor { dbar, dbar_star };

/// e^{∓2iψ/h}-conjugated inverse: dbar applies C∘(e^{-2iψ/h}·), dbar_star
/// applies C*∘(e^{+2iψ/h}·).
ComplexGridField conjugated_inverse(const CauchyTransform& ct, const ComplexGridField& f,
                                    const ComplexGridField& psi, double h, ConjugatedFlavor flavor);

struct NeumannSeries {
    ComplexGridField s;
    ComplexGridField r;
    int terms = 0;
    double first_ratio = 0.0;  // measured contraction of the first iterate
};

/// Remainder of the CGO ansatz for (Δ + potential)v = 0: geometric series
/// s = Σ T^j B(potential·a/4), r = -(conjugated inverse of s). Truncates when
/// a term drops below tol times the first term; refuses when the measured
/// contraction ratio is ≥ 0.9.
NeumannSeries neumann_remainder(const CauchyTransform& ct, const ComplexGridField& potential,
                                const ComplexGridField& amplitude, const CGOPhase& phase, double h,
                                double tol = 1e-10);

struct CGONorms {
    double l2_r = 0.0;
    double l2_s = 0.0;
    double lp_r = 0.0;      // p = 4
    double l2_grad_r = 0.0;
};

struct CGOSolution {
    CGOPhase phase;
    ComplexGridField amplitude;
    ComplexGridField r;
    ComplexGridField s;
    double h = 0.0;
    int terms = 0;
    CGONorms norms;
};

CGOSolution build_cgo(const CauchyTransform& ct, const ComplexGridField& potential,
                      const ComplexGridField& amplitude, const CGOPhase& phase, double h,
                      double tol = 1e-10);

/// v(z) = e^{exponent(z)/h} (a + r) on the grid.
ComplexGridField cgo_values(const CGOSolution& sol);

/// ‖(Δ + potential)v‖ / ‖potential·v‖ over the disk interior (5-point Δ).
double cgo_relative_residual(const CGOSolution& sol, const ComplexGridField& potential);
/// ‖Δv‖ normalized by ‖v‖·max|Φ'|²/h²; for potential = 0 this is pure
/// discretization error.
double cgo_normalized_residual(const CGOSolution& sol);

struct DecayReport {
    std::vector<double> h;
    std::vector<double> norm;   // ‖r_h‖_{L²(disk)}
    double slope = 0.0;
    double target = 0.0;
    bool pass = false;
};

/// Fit of log‖r_h‖ against log h. Target 0.45 for phases with a critical
/// point, 0.9 without. Needs ≥ 4 h values spanning at least a decade.
DecayReport decay_study(const CauchyTransform& ct, const ComplexGridField& potential,
                        const ComplexGridField& amplitude, const CGOPhase& phase,
                        const std::vector<double>& h_list, double tol = 1e-10);

/// Default sweep 0.4 → 0.04 (one decade, 6 points).
std::vector<double> default_h_list();

struct StationaryPhaseResult {
    std::vector<double> h;
    std::vector<Complex> scaled_integral;  // (1/h)∫ amplitude e^{(2Φ-2Φ̄)/h}
    Complex extrapolated;
    Complex predicted;    // C_sp · amplitude(z0)
    double rel_error = 0.0;
};

/// Localization of (1/h)∫ a e^{(2Φ-2Φ̄)/h} at the phase's critical point;
/// compares the h→0 Richardson extrapolation against C_sp·a(z0).
StationaryPhaseResult stationary_phase_probe(const ComplexGridField& amplitude,
                                             const CGOPhase& phase,
                                             const std::vector<double>& h_list);

/// The constant in the localization limit for the family Φ = (z-z0)²/2,
/// measured once by dense quadrature of the model oscillatory integral with a
/// plateau amplitude. Cached after the first call.
double stationary_phase_constant();

void dump_grid_field(std::ostream& os, const ComplexGridField& f);
ComplexGridField load_grid_field(std::istream& is);

}  // namespace pmc
