#ifndef SRSGROUP_SRS_HPP
#define SRSGROUP_SRS_HPP

#include <random>
#include <string>
#include <vector>

#include "srsgroup/channel.hpp"

namespace srsgroup {

// One sounding occasion as reported: per beam-layer row the 273 PRB-level
// estimates, plus a reception flag per PRB pair (subband losses hit both
// PRBs of a pair together).
struct RawSrsGrid {
    int n_rows = 0;
    int n_prb = 0;
    std::vector<cdouble> values;     // row-major, n_rows x n_prb
    std::vector<char> prsg_received; // ceil(n_prb/2) flags

    int n_prsg() const { return (n_prb + 1) / 2; }
    cdouble& at(int r, int c) { return values[static_cast<std::size_t>(r) * n_prb + c]; }
    const cdouble& at(int r, int c) const
    {
        return values[static_cast<std::size_t>(r) * n_prb + c];
    }
};

// Subband-granular grid after pair averaging (and after decimation). The
// cold flags are set by ForwardFiller for columns that never carried data.
struct PrsgGrid {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<cdouble> values; // row-major
    std::vector<char> received;  // per column
    std::vector<char> cold;      // per column

    cdouble& at(int r, int c) { return values[static_cast<std::size_t>(r) * n_cols + c]; }
    const cdouble& at(int r, int c) const
    {
        return values[static_cast<std::size_t>(r) * n_cols + c];
    }
};

// Amplitude fingerprint of one occasion: one value per beam-layer row,
// averaged over the surviving subbands, with the ground-truth pose kept
// alongside for training and evaluation.
struct Snapshot {
    int user = 0;
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    std::vector<double> features;
    int cold_cols = 0;
};

// Wraps a full-band CTF (one value per PRB) as a raw grid with every
// subband marked received.
RawSrsGrid raw_grid_from_ctf(const CtfMatrix& ctf);

// Drops each PRB pair independently with probability p_miss.
void apply_reception_mask(RawSrsGrid& grid, double p_miss, std::mt19937_64& rng);

// 273 PRBs -> 137 subbands: column j is the mean of PRBs 2j and 2j+1; an
// odd tail PRB forms its own subband.
PrsgGrid prb_pair_average(const RawSrsGrid& grid);

// Keeps every stride-th column starting at 0: 137 -> 46 for stride 3.
PrsgGrid prsg_downsample(const PrsgGrid& grid, int stride = 3);

// Per-user streaming hole filler: a missing column repeats the last
// received value; columns with no history yet stay zero and are flagged
// cold. Filling an already-filled grid changes nothing.
class ForwardFiller {
  public:
    ForwardFiller(int n_rows, int n_cols);
    void fill(PrsgGrid& grid);
    void reset();

  private:
    int n_rows_;
    int n_cols_;
    std::vector<cdouble> last_;
    std::vector<char> seen_;
};

// Mean amplitude per row over all columns. Requires a filled grid: every
// column must be either received or cold.
Snapshot assemble_snapshot(const PrsgGrid& grid);

void export_snapshots_csv(const std::string& path, const std::vector<Snapshot>& snaps);
std::vector<Snapshot> import_snapshots_csv(const std::string& path);

} // namespace srsgroup

#endif
