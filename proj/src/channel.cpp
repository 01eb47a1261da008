#include "srsgroup/channel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "srsgroup/io.hpp"
#include "srsgroup/rng.hpp"

namespace srsgroup {

double ArrayConfig::wavelength() const
{
    return kSpeedOfLight / carrier_frequency;
}

void ArrayConfig::validate() const
{
    if (panel_cols <= 0 || elements_per_pol % panel_cols != 0)
        throw std::invalid_argument("array: elements_per_pol must be a multiple of panel_cols");
    if (n_beams_v <= 0 || n_beams_h <= 0)
        throw std::invalid_argument("array: beam counts must be positive");
    if (elements_per_pol < n_beams_v || elements_per_pol < n_beams_h)
        throw std::invalid_argument("array: elements_per_pol must cover the beam count");
    if (ue_layers <= 0)
        throw std::invalid_argument("array: ue_layers must be positive");
    if (carrier_frequency <= 0.0 || bandwidth <= 0.0)
        throw std::invalid_argument("array: carrier/bandwidth must be positive");
    if (element_spacing <= 0.0)
        throw std::invalid_argument("array: element_spacing must be positive");
}

namespace {

constexpr double kTwoPi = 2.0 * kPi;

// Sum_{m=0}^{count-1} exp(j m phase), evaluated as a Dirichlet kernel so
// the on-peak value (phase = 2*pi*n) is exact.
cdouble uniform_linear_sum(int count, double phase)
{
    const double half = 0.5 * phase;
    const double s = std::sin(half);
    double mag;
    if (std::abs(s) > 1e-9)
        mag = std::sin(count * half) / s;
    else
        mag = count * std::cos(count * half) / std::cos(half);
    const double arg = (count - 1) * half;
    return {mag * std::cos(arg), mag * std::sin(arg)};
}

struct BeamGridTables {
    // Per-path, per-frequency factored column/row sums over DFT indices.
    std::vector<cdouble> col; // size panel_cols
    std::vector<cdouble> row; // size panel_rows
};

void fill_tables(const ArrayConfig& a, double u, double v, double f, BeamGridTables& t)
{
    const int cols = a.panel_cols;
    const int rows = a.panel_rows();
    const double fr = f / a.carrier_frequency;
    t.col.resize(cols);
    t.row.resize(rows);
    for (int kc = 0; kc < cols; ++kc)
        t.col[kc] = uniform_linear_sum(cols, kTwoPi * (fr * a.element_spacing * u - double(kc) / cols));
    for (int kr = 0; kr < rows; ++kr)
        t.row[kr] = uniform_linear_sum(rows, kTwoPi * (fr * a.element_spacing * v - double(kr) / rows));
}

double uniform_phase(std::uint64_t base, std::uint64_t stream, std::uint64_t index)
{
    // 53-bit uniform in [0, 1) from the derived seed, scaled to [0, 2*pi)
    const std::uint64_t bits = derive_seed(base, stream, index) >> 11;
    return kTwoPi * (static_cast<double>(bits) / 9007199254740992.0);
}

} // namespace

std::vector<MultipathComponent> compute_multipath(const Pose& pose, const ScenarioConfig& scene,
                                                  const ArrayConfig& array)
{
    const double lambda = array.wavelength();
    const Vec3 ue{pose.x, pose.y, pose.z};
    const Vec3 bs = scene.bs_position;

    // Per-layer gain of the vehicle-mounted UE antennas: a cardioid-like
    // pattern rotated with the vehicle heading, layer 1 turned 90 degrees
    // against layer 0. dep is the horizontal departure direction at the UE.
    auto layer_gain = [&](double dep_x, double dep_y, int layer) {
        if (scene.ue_directivity == 0.0)
            return 1.0;
        const double dep_cog = deg_to_rad(course_over_ground(dep_x, dep_y));
        const double rel = dep_cog - deg_to_rad(pose.heading) - layer * (kPi / 2.0);
        return 1.0 + scene.ue_directivity * std::cos(rel);
    };

    std::vector<MultipathComponent> mpcs;
    const int layers = array.ue_layers;

    if (scene.scenario == Scenario::LoS) {
        const Vec3 d = ue - bs;
        const double dist = norm(d);
        if (dist < 1e-6)
            throw std::invalid_argument("multipath: UE coincides with the base station");
        MultipathComponent mpc;
        mpc.delay = dist / kSpeedOfLight;
        mpc.azimuth = std::atan2(d.y, d.x);
        mpc.elevation = std::atan2(d.z, std::hypot(d.x, d.y));
        const cdouble base = (1.0 / dist) * std::polar(1.0, -kTwoPi * dist / lambda);
        for (int m = 0; m < layers; ++m) {
            double extra = m == 0 ? 0.0
                                  : uniform_phase(scene.rng_seed, rng_stream::layer_phase,
                                                  static_cast<std::uint64_t>(m) << 32);
            double g = layer_gain(bs.x - ue.x, bs.y - ue.y, m);
            mpc.amplitude_per_layer.push_back(g * base * std::polar(1.0, extra));
        }
        mpcs.push_back(std::move(mpc));
    }

    for (std::size_t s = 0; s < scene.scatterers.size(); ++s) {
        const Vec3& sc = scene.scatterers[s];
        const Vec3 bs_to_sc = sc - bs;
        const Vec3 sc_to_ue = ue - sc;
        const double d1 = norm(bs_to_sc);
        const double d2 = norm(sc_to_ue);
        if (d1 < 1e-6)
            throw std::invalid_argument("multipath: scatterer coincides with the base station");
        if (d2 < 1e-6)
            throw std::invalid_argument("multipath: UE coincides with a scatterer");
        MultipathComponent mpc;
        mpc.delay = (d1 + d2) / kSpeedOfLight;
        mpc.azimuth = std::atan2(bs_to_sc.y, bs_to_sc.x);
        mpc.elevation = std::atan2(bs_to_sc.z, std::hypot(bs_to_sc.x, bs_to_sc.y));
        const double refl = uniform_phase(scene.rng_seed, rng_stream::scatterer_phase, s);
        const cdouble base =
            (1.0 / (d1 * d2)) * std::polar(1.0, -kTwoPi * (d1 + d2) / lambda + refl);
        const std::uint64_t path_id = s + 1; // 0 is reserved for the direct path
        for (int m = 0; m < layers; ++m) {
            double extra = m == 0 ? 0.0
                                  : uniform_phase(scene.rng_seed, rng_stream::layer_phase,
                                                  (static_cast<std::uint64_t>(m) << 32) | path_id);
            double g = layer_gain(sc.x - ue.x, sc.y - ue.y, m);
            mpc.amplitude_per_layer.push_back(g * base * std::polar(1.0, extra));
        }
        mpcs.push_back(std::move(mpc));
    }
    return mpcs;
}

cdouble beam_response(const ArrayConfig& array, int beam_index, Polarization pol, double azimuth,
                      double elevation, double f)
{
    const int n_beams = pol == Polarization::V ? array.n_beams_v : array.n_beams_h;
    if (beam_index < 0 || beam_index >= n_beams)
        throw std::out_of_range("beam_response: beam index outside polarization group");

    const int cols = array.panel_cols;
    const int rows = array.panel_rows();
    const int kc = beam_index % cols;
    const int kr = beam_index / cols;
    if (kr >= rows)
        throw std::out_of_range("beam_response: beam index outside DFT grid");

    const double u = std::sin(azimuth) * std::cos(elevation);
    const double v = std::sin(elevation);
    const double fr = f / array.carrier_frequency;
    const cdouble ch =
        uniform_linear_sum(cols, kTwoPi * (fr * array.element_spacing * u - double(kc) / cols));
    const cdouble cv =
        uniform_linear_sum(rows, kTwoPi * (fr * array.element_spacing * v - double(kr) / rows));
    return ch * cv;
}

cdouble beam_response_reference(const ArrayConfig& array, int beam_index, Polarization pol,
                                double azimuth, double elevation, double f)
{
    const int n_beams = pol == Polarization::V ? array.n_beams_v : array.n_beams_h;
    if (beam_index < 0 || beam_index >= n_beams)
        throw std::out_of_range("beam_response: beam index outside polarization group");

    const int cols = array.panel_cols;
    const int rows = array.panel_rows();
    const int kc = beam_index % cols;
    const int kr = beam_index / cols;
    const double u = std::sin(azimuth) * std::cos(elevation);
    const double v = std::sin(elevation);
    const double fr = f / array.carrier_frequency;

    cdouble acc{0.0, 0.0};
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            const double steer = kTwoPi * fr * array.element_spacing * (c * u + r * v);
            const double weight = kTwoPi * (double(c * kc) / cols + double(r * kr) / rows);
            acc += std::polar(1.0, steer - weight);
        }
    }
    return acc;
}

std::vector<double> prb_center_frequencies(const ArrayConfig& array, int n_prb)
{
    // PRB k is centered at carrier + (k + 0.5 - n/2) * prb_bandwidth, so an
    // odd count puts the middle PRB exactly on the carrier.
    std::vector<double> grid(n_prb);
    const double prb_bw = array.bandwidth / n_prb;
    for (int k = 0; k < n_prb; ++k)
        grid[k] = array.carrier_frequency + (k + 0.5 - 0.5 * n_prb) * prb_bw;
    return grid;
}

std::vector<double> prsg_center_frequencies(const ArrayConfig& array)
{
    const std::vector<double> prb = prb_center_frequencies(array);
    std::vector<double> grid;
    grid.reserve(46);
    for (int k = 0; k * 3 < 137; ++k) {
        const int j = 3 * k; // PRSG index after pairing, downsample phase 0
        if (j < 136)
            grid.push_back(0.5 * (prb[2 * j] + prb[2 * j + 1]));
        else
            grid.push_back(prb[272]); // odd-tail group holds the lone last PRB
    }
    return grid;
}

CtfMatrix synthesize_ctf(const std::vector<MultipathComponent>& mpcs, const ArrayConfig& array,
                         const std::vector<double>& freq_grid)
{
    array.validate();
    if (mpcs.empty())
        throw std::invalid_argument("synthesize_ctf: no multipath components");
    if (freq_grid.empty())
        throw std::invalid_argument("synthesize_ctf: empty frequency grid");

    CtfMatrix ctf;
    ctf.n_beams_h = array.n_beams_h;
    ctf.n_beams_v = array.n_beams_v;
    ctf.n_layers = array.ue_layers;
    ctf.n_freq = static_cast<int>(freq_grid.size());
    ctf.values.assign(static_cast<std::size_t>(ctf.rows()) * ctf.n_freq, cdouble{0.0, 0.0});

    const int cols = array.panel_cols;
    BeamGridTables tables;
    std::vector<cdouble> beam_vals(std::max(array.n_beams_h, array.n_beams_v));

    for (const MultipathComponent& mpc : mpcs) {
        if (static_cast<int>(mpc.amplitude_per_layer.size()) != array.ue_layers)
            throw std::invalid_argument("synthesize_ctf: component layer count mismatch");
        const double u = std::sin(mpc.azimuth) * std::cos(mpc.elevation);
        const double v = std::sin(mpc.elevation);
        for (int fi = 0; fi < ctf.n_freq; ++fi) {
            const double f = freq_grid[fi];
            fill_tables(array, u, v, f, tables);
            const cdouble delay_phase = std::polar(1.0, -kTwoPi * f * mpc.delay);
            const int n_beams = std::max(array.n_beams_h, array.n_beams_v);
            for (int i = 0; i < n_beams; ++i)
                beam_vals[i] = tables.col[i % cols] * tables.row[i / cols];
            for (int m = 0; m < array.ue_layers; ++m) {
                const cdouble coef = mpc.amplitude_per_layer[m] * delay_phase;
                // Both polarization groups share the codebook and the path
                // amplitudes, so the H and V blocks receive the same values.
                cdouble* h_row = &ctf.at(ctf.row_index(m, Polarization::H, 0), 0);
                cdouble* v_row = &ctf.at(ctf.row_index(m, Polarization::V, 0), 0);
                for (int i = 0; i < n_beams; ++i) {
                    const cdouble add = beam_vals[i] * coef;
                    if (i < array.n_beams_h)
                        h_row[static_cast<std::size_t>(i) * ctf.n_freq + fi] += add;
                    if (i < array.n_beams_v)
                        v_row[static_cast<std::size_t>(i) * ctf.n_freq + fi] += add;
                }
            }
        }
    }
    return ctf;
}

CtfMatrix synthesize_ctf_reference(const std::vector<MultipathComponent>& mpcs,
                                   const ArrayConfig& array, const std::vector<double>& freq_grid)
{
    array.validate();
    if (mpcs.empty())
        throw std::invalid_argument("synthesize_ctf: no multipath components");
    if (freq_grid.empty())
        throw std::invalid_argument("synthesize_ctf: empty frequency grid");

    CtfMatrix ctf;
    ctf.n_beams_h = array.n_beams_h;
    ctf.n_beams_v = array.n_beams_v;
    ctf.n_layers = array.ue_layers;
    ctf.n_freq = static_cast<int>(freq_grid.size());
    ctf.values.assign(static_cast<std::size_t>(ctf.rows()) * ctf.n_freq, cdouble{0.0, 0.0});

    for (const MultipathComponent& mpc : mpcs) {
        if (static_cast<int>(mpc.amplitude_per_layer.size()) != array.ue_layers)
            throw std::invalid_argument("synthesize_ctf: component layer count mismatch");
        for (int m = 0; m < array.ue_layers; ++m) {
            for (auto pol : {Polarization::H, Polarization::V}) {
                const int n_beams = pol == Polarization::V ? array.n_beams_v : array.n_beams_h;
                for (int i = 0; i < n_beams; ++i) {
                    for (int fi = 0; fi < ctf.n_freq; ++fi) {
                        const double f = freq_grid[fi];
                        const cdouble psi =
                            beam_response(array, i, pol, mpc.azimuth, mpc.elevation, f);
                        ctf.at(ctf.row_index(m, pol, i), fi) +=
                            psi * mpc.amplitude_per_layer[m] *
                            std::polar(1.0, -kTwoPi * f * mpc.delay);
                    }
                }
            }
        }
    }
    return ctf;
}

void add_ctf_noise(CtfMatrix& ctf, double snr_db, std::mt19937_64& rng)
{
    if (ctf.values.empty())
        return;
    double power = 0.0;
    for (const cdouble& v : ctf.values)
        power += std::norm(v);
    power /= static_cast<double>(ctf.values.size());
    const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0) / 2.0);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (cdouble& v : ctf.values)
        v += cdouble{gauss(rng), gauss(rng)};
}

void save_ctf_binary(const std::string& path_prefix, const std::vector<CtfMatrix>& mats)
{
    if (mats.empty())
        throw std::invalid_argument("save_ctf_binary: nothing to save");
    const int rows = mats.front().rows();
    const int cols = mats.front().n_freq;
    for (const CtfMatrix& m : mats)
        if (m.rows() != rows || m.n_freq != cols)
            throw std::invalid_argument("save_ctf_binary: inhomogeneous shapes");

    std::ofstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin)
        throw std::runtime_error("cannot open for writing: " + path_prefix + ".bin");
    std::vector<float> buf;
    for (const CtfMatrix& m : mats) {
        buf.clear();
        buf.reserve(m.values.size() * 2);
        for (const cdouble& v : m.values) {
            buf.push_back(static_cast<float>(v.real()));
            buf.push_back(static_cast<float>(v.imag()));
        }
        bin.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    bin.close();

    nlohmann::json sidecar{{"count", mats.size()},
                           {"rows", rows},
                           {"cols", cols},
                           {"n_beams_h", mats.front().n_beams_h},
                           {"n_beams_v", mats.front().n_beams_v},
                           {"n_layers", mats.front().n_layers},
                           {"dtype", "complex64"},
                           {"layout", "row-major"},
                           {"interleave", "re,im"},
                           {"byte_order", "little-endian"}};
    write_file(path_prefix + ".json", sidecar.dump(2) + "\n");
}

std::vector<CtfMatrix> load_ctf_binary(const std::string& path_prefix)
{
    const nlohmann::json sidecar = nlohmann::json::parse(read_file(path_prefix + ".json"));
    const std::size_t count = sidecar.at("count").get<std::size_t>();
    const int rows = sidecar.at("rows").get<int>();
    const int cols = sidecar.at("cols").get<int>();
    if (sidecar.at("dtype").get<std::string>() != "complex64")
        throw std::runtime_error("load_ctf_binary: unexpected dtype");

    std::ifstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin)
        throw std::runtime_error("cannot open for reading: " + path_prefix + ".bin");

    std::vector<CtfMatrix> mats(count);
    std::vector<float> buf(static_cast<std::size_t>(rows) * cols * 2);
    for (CtfMatrix& m : mats) {
        m.n_beams_h = sidecar.at("n_beams_h").get<int>();
        m.n_beams_v = sidecar.at("n_beams_v").get<int>();
        m.n_layers = sidecar.at("n_layers").get<int>();
        m.n_freq = cols;
        bin.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (!bin)
            throw std::runtime_error("load_ctf_binary: truncated payload");
        m.values.resize(static_cast<std::size_t>(rows) * cols);
        for (std::size_t i = 0; i < m.values.size(); ++i)
            m.values[i] = cdouble{buf[2 * i], buf[2 * i + 1]};
    }
    return mats;
}

void save_ctf_csv(const std::string& path, const CtfMatrix& ctf)
{
    CsvWriter w(path, {"row", "col", "re", "im"});
    for (int r = 0; r < ctf.rows(); ++r)
        for (int c = 0; c < ctf.n_freq; ++c)
            w.write_row({std::to_string(r), std::to_string(c), format_double(ctf.at(r, c).real()),
                         format_double(ctf.at(r, c).imag())});
}

} // namespace srsgroup
