#pragma once

// Muckenhoupt characteristics of sampled weights and the weight families
// used by the experiments.

#include "sparsedom/dyadic.hpp"
#include "sparsedom/grid.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace sparsedom {

/// Which cubes the outer supremum of a characteristic ranges over.
enum class CubeSweep { dyadic, all_windows };

/// sup_Q <w>_Q <w^{1-p'}>_Q^{p-1}; p > 1.
double ap_constant(const Weight& w, const DyadicLattice& lattice, double p, CubeSweep sweep = CubeSweep::dyadic);

/// max over cells of Mw / w, M over all cube windows.
double a1_constant(const Weight& w);

/// Fujii-Wilson constant sup_Q w(Q)^{-1} int_Q M(w chi_Q).
double ainf_constant(const Weight& w, const DyadicLattice& lattice, CubeSweep sweep = CubeSweep::dyadic);

/// max over lattice cubes of <w^{1+delta}>^{1/(1+delta)} / <w>.
double reverse_holder_check(const Weight& w, const DyadicLattice& lattice, double delta);

/// Largest delta in (0, 16] with reverse_holder_check(w, delta) <= 2.
double reverse_holder_margin(const Weight& w, const DyadicLattice& lattice);

/// Smallest tau >= 1 such that every suite member satisfies the reverse Hoelder
/// bound 2 at delta = 1 / (tau [w]_{A_inf}). Every weight must live on
/// the lattice grid.
double calibrate_tau(std::span<const Weight> suite, const DyadicLattice& lattice);

/// |x|^a at cell centres.
Weight power_weight(const Grid& grid, double a);

/// sigma = w^{1/(1-p)}.
Weight dual_weight(const Weight& w, double p);

/// A smeared point mass: `mass` spread uniformly over the cells whose centres
/// lie within `radius` of (x, y); radius 0 selects the single containing cell.
struct Atom {
    double x = 0.0, y = 0.0, mass = 1.0, radius = 0.0;
};

/// Density of a finite sum of atoms.
GridFunction atomic_measure(const Grid& grid, std::span<const Atom> atoms);

/// (M mu)^delta for the given atoms; 0 < delta < 1.
Weight a1_weight_from_atoms(const Grid& grid, std::span<const Atom> atoms, double delta);

/// (M mu)^delta for 1-4 seeded atoms; the atoms depend only on (seed, side length).
Weight random_a1_weight(const Grid& grid, std::uint64_t seed, double delta);
std::vector<Atom> random_atoms(const Grid& grid, std::uint64_t seed);

struct WeightReport {
    std::map<double, double> ap;
    double a1 = 1.0;
    double ainf = 1.0;
    double rh_delta = 0.0;
    double tau_calibrated = 1.0;
};

WeightReport weight_report(const Weight& w, const DyadicLattice& lattice, std::span<const double> ps);

/// Quantities of the improved A_p bounds: [w]_{A_p}^{min(2, p')}, [w]_{A_p}^{p'}
/// and the mixed [w]_{A_p}^{1/p}([w]_{A_inf}^{1/p'} + [sigma]_{A_inf}^{1/p}) min([w]_{A_inf}, [sigma]_{A_inf}).
struct ImprovedApBounds {
    double weak_power = 0.0;
    double strong_power = 0.0;
    double mixed = 0.0;
};
ImprovedApBounds improved_ap_bounds(const Weight& w, const DyadicLattice& lattice, double p);

}  // namespace sparsedom
