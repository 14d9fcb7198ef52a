#include <algorithm>
#include <random>

#include "rss/errors.hpp"
#include "rss/layout.hpp"
#include "rss/network.hpp"

namespace rss {

namespace {

Heading row_direction(int r, int rows) {
  if (r == 0) return Heading::E;
  if (r == rows - 1) return Heading::W;
  return r % 2 == 0 ? Heading::E : Heading::W;
}

Heading col_direction(int c, int cols) {
  if (c == 0) return Heading::N;
  if (c == cols - 1) return Heading::S;
  return c % 2 == 0 ? Heading::N : Heading::S;
}

bool connected(const Layout& layout) {
  try {
    build_flow_network(layout, Demand{std::vector<double>(static_cast<std::size_t>(layout.dropoff_count()), 0.0)});
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

Layout generate_standard_layout(int rows, int cols, int n_workstations, int n_dropoffs, std::uint64_t seed) {
  if (rows < 3 || cols < 3) throw PlacementInfeasible("grid must be at least 3x3");
  if (n_workstations < 1) throw PlacementInfeasible("need at least one workstation");
  if (n_dropoffs < 0) throw PlacementInfeasible("negative drop-off count");

  std::vector<int> ws_rows;
  for (int k = 0; k < n_workstations; ++k) {
    const int r = (k + 1) * rows / (n_workstations + 1);
    if (r < 1 || r > rows - 2 || (!ws_rows.empty() && r - ws_rows.back() < 2))
      throw PlacementInfeasible("not enough rows for " + std::to_string(n_workstations) + " workstations");
    ws_rows.push_back(r);
  }

  std::vector<std::pair<int, int>> candidates;
  for (int r = 2; r <= rows - 2; r += 2)
    for (int c = 3; c <= cols - 2; c += 3) candidates.emplace_back(r, c);
  if (static_cast<int>(candidates.size()) < n_dropoffs)
    throw PlacementInfeasible("room for " + std::to_string(candidates.size()) + " drop-offs, asked for " +
                              std::to_string(n_dropoffs));

  Layout base(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      CellSpec& cell = base.at(r, c);
      cell.kind = CellKind::Ordinary;
      cell.headings.insert(row_direction(r, rows));
      cell.headings.insert(col_direction(c, cols));
    }
  }
  for (int k = 0; k < n_workstations; ++k) base.at(ws_rows[static_cast<std::size_t>(k)], 0) = {CellKind::Workstation, {}, k + 1};

  // Raw engine output keeps the selection identical across standard libraries.
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto order = candidates;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    order.resize(static_cast<std::size_t>(n_dropoffs));
    std::sort(order.begin(), order.end());

    Layout layout = base;
    int id = 1;
    for (auto [r, c] : order) layout.at(r, c) = {CellKind::DropOff, {}, id++};
    try {
      layout.validate();
    } catch (const Error&) {
      continue;
    }
    if (connected(layout)) return layout;
  }
  throw PlacementInfeasible("no connected placement found");
}

}  // namespace rss
