#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdce/evolve.hpp"
#include "pdce/fock.hpp"

namespace pdce {

double mean_photon(const QuantumState& s);

/// (<n^2> - <n>^2 - <n>) / <n>; empty below <n> = 1e-10.
std::optional<double> mandel_q(const QuantumState& s);

/// Variances of q = (a + a+)/2 and p = (a - a+)/2i, first moments included.
std::pair<double, double> quadrature_variances(const QuantumState& s);

/// -10 log10(variance / (1/4)).
double squeezing_db(double variance);

/// Phase-space axes x = sqrt(2) q, p = sqrt(2) p_quad, so that the vacuum is
/// (1/pi) exp(-(x^2 + p^2)).
struct WignerGrid {
    std::vector<double> x_axis;
    std::vector<double> p_axis;
    Eigen::MatrixXd values;  // values(i, j) = W(x_axis[i], p_axis[j])
    double cell_area = 0.0;
    std::vector<std::string> warnings;

    double integral() const;
    double max_abs() const;
    double boundary_max_abs() const;
};

/// Laguerre-kernel evaluation on a uniform odd-sized grid.
WignerGrid wigner(const QuantumState& s, double x_max, double p_max, int n_points);

/// Repeats wigner() with extents grown by 1.5x until the boundary stays below
/// 1e-4 of the peak (at most max_widen times); leftover warnings stay attached.
WignerGrid wigner_auto(const QuantumState& s, double extent = 6.0, int n_points = 201,
                       int max_widen = 4);

/// Sum of (|W| - W) cell_area.
double wigner_negativity(const WignerGrid& g);

/// Connected (4-neighbour) regions where W < -threshold * max|W|.
int negative_regions(const WignerGrid& g, double threshold = 1e-3);

/// Rate in photons per second. times are physical seconds, n the matching
/// mean photon numbers. When an interior maximum of the drive-period average
/// exists (averaging window `smoothing_window` seconds, 0 disables it), the rate
/// is taken there; otherwise at the final sample.
struct PhotonRate {
    double rate;
    double at_time;
    double n_at;
    bool from_first_maximum;
};

PhotonRate photon_rate(const std::vector<double>& times, const std::vector<double>& n,
                       double smoothing_window = 0.0);
PhotonRate photon_rate(const Trajectory& traj, double delta_bar, double smoothing_window = 0.0);

}  // namespace pdce
