#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rss {

enum class Heading : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

inline constexpr Heading kHeadings[4] = {Heading::N, Heading::E, Heading::S, Heading::W};

constexpr int dr(Heading h) { return h == Heading::N ? -1 : (h == Heading::S ? 1 : 0); }
constexpr int dc(Heading h) { return h == Heading::E ? 1 : (h == Heading::W ? -1 : 0); }
constexpr Heading opposite(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 2) % 4); }
constexpr char heading_char(Heading h) { return "NESW"[static_cast<int>(h)]; }

// Bit set over {N,E,S,W}.
class HeadingSet {
 public:
  constexpr HeadingSet() = default;
  constexpr explicit HeadingSet(std::uint8_t bits) : bits_(bits) {}
  constexpr bool contains(Heading h) const { return (bits_ >> static_cast<int>(h)) & 1U; }
  constexpr void insert(Heading h) { bits_ |= static_cast<std::uint8_t>(1U << static_cast<int>(h)); }
  constexpr int size() const { return __builtin_popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool operator==(const HeadingSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

enum class CellKind : std::uint8_t { Void, Ordinary, Workstation, DropOff };

struct CellSpec {
  CellKind kind = CellKind::Void;
  HeadingSet headings;  // Ordinary only
  int id = 0;           // Workstation / DropOff only, 1-based

  bool operator==(const CellSpec&) const = default;
};

struct Coord {
  int row = 0;
  int col = 0;
  bool operator==(const Coord&) const = default;
};

class Layout {
 public:
  Layout() = default;
  Layout(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int cell_count() const { return rows_ * cols_; }
  int index(int r, int c) const { return r * cols_ + c; }
  Coord coord(int index) const { return {index / cols_, index % cols_}; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }

  const CellSpec& at(int r, int c) const { return cells_[static_cast<std::size_t>(index(r, c))]; }
  CellSpec& at(int r, int c) { return cells_[static_cast<std::size_t>(index(r, c))]; }
  const CellSpec& at(int index) const { return cells_[static_cast<std::size_t>(index)]; }

  // Cell index of the neighbor in direction h, or -1 when off-grid.
  int neighbor(int index, Heading h) const;

  int workstation_count() const { return static_cast<int>(workstations_.size()); }
  int dropoff_count() const { return static_cast<int>(dropoffs_.size()); }
  // Cell index of workstation / drop-off `id` (1-based).
  int workstation_cell(int id) const { return workstations_.at(static_cast<std::size_t>(id - 1)); }
  int dropoff_cell(int id) const { return dropoffs_.at(static_cast<std::size_t>(id - 1)); }

  // Checks every layout invariant and rebuilds the station indexes. Throws
  // InvariantViolation or UnreachableElement.
  void validate();

  bool operator==(const Layout& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && cells_ == o.cells_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<CellSpec> cells_;
  std::vector<int> workstations_;
  std::vector<int> dropoffs_;
};

Layout parse_layout(std::string_view text);
std::string serialize_layout(const Layout& layout);
Layout load_layout_file(const std::string& path);

// Grid with alternating east/west rows and north/south columns, a clockwise
// boundary ring, workstations on the west edge and drop-off holes on a
// regular lattice chosen by `seed`.
Layout generate_standard_layout(int rows, int cols, int n_workstations, int n_dropoffs, std::uint64_t seed);

}  // namespace rss
