#include "srsgroup/srs.hpp"

#include <cmath>
#include <stdexcept>

#include "srsgroup/io.hpp"

namespace srsgroup {

RawSrsGrid raw_grid_from_ctf(const CtfMatrix& ctf)
{
    RawSrsGrid grid;
    grid.n_rows = ctf.rows();
    grid.n_prb = ctf.n_freq;
    grid.values = ctf.values;
    grid.prsg_received.assign(grid.n_prsg(), 1);
    return grid;
}

void apply_reception_mask(RawSrsGrid& grid, double p_miss, std::mt19937_64& rng)
{
    if (p_miss < 0.0 || p_miss > 1.0)
        throw std::invalid_argument("apply_reception_mask: p_miss outside [0, 1]");
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto& flag : grid.prsg_received)
        flag = uni(rng) < p_miss ? 0 : 1;
}

PrsgGrid prb_pair_average(const RawSrsGrid& grid)
{
    if (grid.n_rows <= 0 || grid.n_prb <= 0)
        throw std::invalid_argument("prb_pair_average: empty grid");
    if (static_cast<int>(grid.prsg_received.size()) != grid.n_prsg())
        throw std::invalid_argument("prb_pair_average: reception flag count mismatch");

    PrsgGrid out;
    out.n_rows = grid.n_rows;
    out.n_cols = grid.n_prsg();
    out.values.resize(static_cast<std::size_t>(out.n_rows) * out.n_cols);
    out.received.assign(grid.prsg_received.begin(), grid.prsg_received.end());
    out.cold.assign(out.n_cols, 0);

    for (int r = 0; r < out.n_rows; ++r) {
        for (int c = 0; c < out.n_cols; ++c) {
            if (2 * c + 1 < grid.n_prb)
                out.at(r, c) = 0.5 * (grid.at(r, 2 * c) + grid.at(r, 2 * c + 1));
            else
                out.at(r, c) = grid.at(r, 2 * c); // odd tail PRB stands alone
        }
    }
    return out;
}

PrsgGrid prsg_downsample(const PrsgGrid& grid, int stride)
{
    if (stride <= 0)
        throw std::invalid_argument("prsg_downsample: stride must be positive");

    PrsgGrid out;
    out.n_rows = grid.n_rows;
    out.n_cols = (grid.n_cols + stride - 1) / stride;
    out.values.resize(static_cast<std::size_t>(out.n_rows) * out.n_cols);
    out.received.resize(out.n_cols);
    out.cold.resize(out.n_cols);
    for (int c = 0; c < out.n_cols; ++c) {
        out.received[c] = grid.received[c * stride];
        out.cold[c] = grid.cold[c * stride];
        for (int r = 0; r < out.n_rows; ++r)
            out.at(r, c) = grid.at(r, c * stride);
    }
    return out;
}

ForwardFiller::ForwardFiller(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols)
{
    if (n_rows <= 0 || n_cols <= 0)
        throw std::invalid_argument("ForwardFiller: shape must be positive");
    reset();
}

void ForwardFiller::reset()
{
    last_.assign(static_cast<std::size_t>(n_rows_) * n_cols_, cdouble{0.0, 0.0});
    seen_.assign(n_cols_, 0);
}

void ForwardFiller::fill(PrsgGrid& grid)
{
    if (grid.n_rows != n_rows_ || grid.n_cols != n_cols_)
        throw std::invalid_argument("ForwardFiller: grid shape mismatch");

    for (int c = 0; c < n_cols_; ++c) {
        if (grid.received[c]) {
            for (int r = 0; r < n_rows_; ++r)
                last_[static_cast<std::size_t>(r) * n_cols_ + c] = grid.at(r, c);
            seen_[c] = 1;
            grid.cold[c] = 0;
        } else if (seen_[c]) {
            for (int r = 0; r < n_rows_; ++r)
                grid.at(r, c) = last_[static_cast<std::size_t>(r) * n_cols_ + c];
            grid.received[c] = 1;
            grid.cold[c] = 0;
        } else {
            for (int r = 0; r < n_rows_; ++r)
                grid.at(r, c) = cdouble{0.0, 0.0};
            grid.cold[c] = 1;
        }
    }
}

Snapshot assemble_snapshot(const PrsgGrid& grid)
{
    if (grid.n_rows <= 0 || grid.n_cols <= 0)
        throw std::invalid_argument("assemble_snapshot: empty grid");

    Snapshot snap;
    for (int c = 0; c < grid.n_cols; ++c) {
        if (!grid.received[c] && !grid.cold[c])
            throw std::invalid_argument("assemble_snapshot: grid has unfilled columns");
        if (grid.cold[c])
            ++snap.cold_cols;
    }

    snap.features.resize(grid.n_rows);
    for (int r = 0; r < grid.n_rows; ++r) {
        double acc = 0.0;
        for (int c = 0; c < grid.n_cols; ++c)
            acc += std::abs(grid.at(r, c));
        snap.features[r] = acc / grid.n_cols;
    }
    return snap;
}

void export_snapshots_csv(const std::string& path, const std::vector<Snapshot>& snaps)
{
    if (snaps.empty())
        throw std::invalid_argument("export_snapshots_csv: nothing to write");
    const std::size_t n_feat = snaps.front().features.size();

    std::vector<std::string> header{"t", "user"};
    for (std::size_t i = 0; i < n_feat; ++i)
        header.push_back("f" + std::to_string(i));
    header.insert(header.end(), {"x", "y", "heading"});

    CsvWriter w(path, header);
    std::vector<std::string> row;
    for (const Snapshot& s : snaps) {
        if (s.features.size() != n_feat)
            throw std::invalid_argument("export_snapshots_csv: inhomogeneous feature counts");
        row.clear();
        row.push_back(format_double(s.t));
        row.push_back(std::to_string(s.user));
        for (double f : s.features)
            row.push_back(format_double(f));
        row.push_back(format_double(s.x));
        row.push_back(format_double(s.y));
        row.push_back(format_double(s.heading));
        w.write_row(row);
    }
}

std::vector<Snapshot> import_snapshots_csv(const std::string& path)
{
    CsvTable table = read_csv(path);
    const int ct = table.column("t"), cu = table.column("user"), cx = table.column("x"),
              cy = table.column("y"), ch = table.column("heading");
    if (ct < 0 || cu < 0 || cx < 0 || cy < 0 || ch < 0)
        throw std::runtime_error("snapshot csv missing columns: " + path);

    std::vector<int> feat_cols;
    for (int i = 0;; ++i) {
        int c = table.column("f" + std::to_string(i));
        if (c < 0)
            break;
        feat_cols.push_back(c);
    }
    if (feat_cols.empty())
        throw std::runtime_error("snapshot csv has no feature columns: " + path);

    std::vector<Snapshot> snaps;
    snaps.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Snapshot s;
        s.t = std::stod(row[ct]);
        s.user = std::stoi(row[cu]);
        s.x = std::stod(row[cx]);
        s.y = std::stod(row[cy]);
        s.heading = std::stod(row[ch]);
        s.features.reserve(feat_cols.size());
        for (int c : feat_cols)
            s.features.push_back(std::stod(row[c]));
        snaps.push_back(std::move(s));
    }
    return snaps;
}

} // namespace srsgroup
