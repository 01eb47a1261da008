#ifndef SRSGROUP_CHANNEL_HPP
#define SRSGROUP_CHANNEL_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "srsgroup/scene.hpp"

namespace srsgroup {

using cdouble = std::complex<double>;

enum class Polarization { V, H };

// Beam-space array profile: 64 beams total, one 2-D DFT codebook per
// polarization group on a panel_cols x (elements_per_pol/panel_cols)
// uniform planar array.
struct ArrayConfig {
    int n_beams_v = 32;
    int n_beams_h = 32;
    int elements_per_pol = 32;
    double element_spacing = 0.5; // wavelengths at carrier
    double carrier_frequency = 3.85e9;
    double bandwidth = 100e6;
    int ue_layers = 2;
    int panel_cols = 8; // horizontal elements per row of the panel

    int panel_rows() const { return elements_per_pol / panel_cols; }
    double wavelength() const;
    void validate() const;
};

// One propagation path: arrival delay and angles at the base station plus
// one complex amplitude per recorded UE layer.
struct MultipathComponent {
    double delay = 0.0;     // s
    double azimuth = 0.0;   // rad, arrival at BS
    double elevation = 0.0; // rad, arrival at BS
    std::vector<cdouble> amplitude_per_layer;
};

// Beam x frequency channel transfer functions, rows stacked as
// [H layer0, V layer0, H layer1, V layer1, ...]. Default profile is
// 2*(32+32) = 128 rows by 46 frequency bins.
struct CtfMatrix {
    int n_beams_h = 0;
    int n_beams_v = 0;
    int n_layers = 0;
    int n_freq = 0;
    std::vector<cdouble> values; // row-major

    int rows() const { return n_layers * (n_beams_h + n_beams_v); }
    int row_index(int layer, Polarization pol, int beam) const
    {
        return layer * (n_beams_h + n_beams_v) + (pol == Polarization::V ? n_beams_h : 0) + beam;
    }
    cdouble& at(int row, int f) { return values[static_cast<std::size_t>(row) * n_freq + f]; }
    const cdouble& at(int row, int f) const
    {
        return values[static_cast<std::size_t>(row) * n_freq + f];
    }
};

// Geometric multipath for one pose: in LoS the direct path comes first,
// then one single-bounce path per scatterer; NLoS drops the direct path.
// Scatterer reflection phases and layer phase offsets are seeded from the
// scene so the fingerprint is stable across poses.
std::vector<MultipathComponent> compute_multipath(const Pose& pose, const ScenarioConfig& scene,
                                                  const ArrayConfig& array);

// Response of one DFT beam to a plane wave from (azimuth, elevation) at
// frequency f. Closed form via the two factored uniform-linear sums.
cdouble beam_response(const ArrayConfig& array, int beam_index, Polarization pol, double azimuth,
                      double elevation, double f);

// Same response by direct summation over the array elements. Serial
// reference used by tests and the benchmark.
cdouble beam_response_reference(const ArrayConfig& array, int beam_index, Polarization pol,
                                double azimuth, double elevation, double f);

// PRB / PRSG center frequency grids for the configured band.
std::vector<double> prb_center_frequencies(const ArrayConfig& array, int n_prb = 273);
std::vector<double> prsg_center_frequencies(const ArrayConfig& array);

// Sum of per-path beam responses with delay phasing, per layer and
// polarization group. The fast path factors the planar array into
// column/row sums shared by all beams.
CtfMatrix synthesize_ctf(const std::vector<MultipathComponent>& mpcs, const ArrayConfig& array,
                         const std::vector<double>& freq_grid);

// Reference triple loop (path x beam x frequency) over beam_response.
CtfMatrix synthesize_ctf_reference(const std::vector<MultipathComponent>& mpcs,
                                   const ArrayConfig& array,
                                   const std::vector<double>& freq_grid);

// Additive complex Gaussian noise at the given SNR relative to the mean
// entry power of the matrix.
void add_ctf_noise(CtfMatrix& ctf, double snr_db, std::mt19937_64& rng);

// Flat binary export (little-endian float32, re/im interleaved, row-major)
// with a JSON sidecar describing the shape; CSV for small cases.
void save_ctf_binary(const std::string& path_prefix, const std::vector<CtfMatrix>& mats);
std::vector<CtfMatrix> load_ctf_binary(const std::string& path_prefix);
void save_ctf_csv(const std::string& path, const CtfMatrix& ctf);

} // namespace srsgroup

#endif
