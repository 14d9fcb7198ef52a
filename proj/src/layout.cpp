#include "rss/layout.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "rss/errors.hpp"

namespace rss {

Layout::Layout(int rows, int cols) : rows_(rows), cols_(cols), cells_(static_cast<std::size_t>(rows * cols)) {
  if (rows <= 0 || cols <= 0) throw ConfigError("layout dimensions must be positive");
}

int Layout::neighbor(int index, Heading h) const {
  const Coord p = coord(index);
  const int r = p.row + dr(h);
  const int c = p.col + dc(h);
  return in_bounds(r, c) ? this->index(r, c) : -1;
}

void Layout::validate() {
  std::vector<std::pair<int, int>> ws;  // (id, cell)
  std::vector<std::pair<int, int>> ds;
  for (int i = 0; i < cell_count(); ++i) {
    const CellSpec& cell = at(i);
    const Coord p = coord(i);
    switch (cell.kind) {
      case CellKind::Ordinary: {
        const HeadingSet h = cell.headings;
        if (h.empty() || h.size() > 2) throw InvariantViolation("heading count", p.row, p.col);
        if ((h.contains(Heading::N) && h.contains(Heading::S)) || (h.contains(Heading::E) && h.contains(Heading::W)))
          throw InvariantViolation("opposite headings", p.row, p.col);
        break;
      }
      case CellKind::Workstation:
        ws.emplace_back(cell.id, i);
        break;
      case CellKind::DropOff:
        ds.emplace_back(cell.id, i);
        break;
      case CellKind::Void:
        break;
    }
  }

  auto index_ids = [&](std::vector<std::pair<int, int>>& items, const char* what) {
    std::vector<int> out(items.size(), -1);
    for (auto [id, cell] : items) {
      const Coord p = coord(cell);
      if (id < 1 || id > static_cast<int>(items.size()) || out[static_cast<std::size_t>(id - 1)] != -1)
        throw InvariantViolation(std::string(what) + " ids must be 1..n and unique", p.row, p.col);
      out[static_cast<std::size_t>(id - 1)] = cell;
    }
    return out;
  };
  workstations_ = index_ids(ws, "workstation");
  dropoffs_ = index_ids(ds, "drop-off");

  for (std::size_t k = 0; k < workstations_.size(); ++k) {
    bool entrance = false;
    bool exit = false;
    for (Heading h : kHeadings) {
      const int n = neighbor(workstations_[k], h);
      if (n < 0 || at(n).kind != CellKind::Ordinary) continue;
      if (at(n).headings.contains(opposite(h))) entrance = true;
      if (at(n).headings.contains(h)) exit = true;
    }
    if (!entrance || !exit) throw UnreachableElement("W" + std::to_string(k + 1));
  }
  for (std::size_t k = 0; k < dropoffs_.size(); ++k) {
    bool any = false;
    for (Heading h : kHeadings) {
      const int n = neighbor(dropoffs_[k], h);
      if (n >= 0 && at(n).kind == CellKind::Ordinary) any = true;
    }
    if (!any) throw UnreachableElement("D" + std::to_string(k + 1));
  }
}

namespace {

CellSpec parse_token(const std::string& tok, int line, int col) {
  CellSpec spec;
  if (tok == ".") return spec;
  const bool numbered = tok.size() > 1 && (tok[0] == 'W' || tok[0] == 'D') &&
                        std::isdigit(static_cast<unsigned char>(tok[1]));
  if (numbered) {
    for (std::size_t i = 1; i < tok.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(tok[i]))) throw SyntaxError(line, col, "bad station token '" + tok + "'");
    spec.kind = tok[0] == 'W' ? CellKind::Workstation : CellKind::DropOff;
    spec.id = std::stoi(tok.substr(1));
    return spec;
  }
  spec.kind = CellKind::Ordinary;
  for (char ch : tok) {
    Heading h;
    switch (ch) {
      case 'N': h = Heading::N; break;
      case 'E': h = Heading::E; break;
      case 'S': h = Heading::S; break;
      case 'W': h = Heading::W; break;
      default: throw SyntaxError(line, col, "bad cell token '" + tok + "'");
    }
    if (spec.headings.contains(h)) throw SyntaxError(line, col, "repeated heading in '" + tok + "'");
    spec.headings.insert(h);
  }
  return spec;
}

}  // namespace

Layout parse_layout(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;

  auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos && line[line.find_first_not_of(" \t")] != '#') return true;
    }
    return false;
  };

  if (!next_content_line()) throw SyntaxError(1, 1, "missing header 'rows cols'");
  int rows = 0;
  int cols = 0;
  {
    std::istringstream hdr(line);
    std::string extra;
    if (!(hdr >> rows >> cols) || (hdr >> extra) || rows <= 0 || cols <= 0)
      throw SyntaxError(line_no, 1, "header must be two positive integers");
  }

  Layout layout(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!next_content_line()) throw SyntaxError(line_no + 1, 1, "expected " + std::to_string(rows) + " grid rows");
    int c = 0;
    std::size_t pos = 0;
    while (true) {
      pos = line.find_first_not_of(" \t", pos);
      if (pos == std::string::npos) break;
      const std::size_t end = line.find_first_of(" \t", pos);
      const std::string tok = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      const int col_no = static_cast<int>(pos) + 1;
      if (c >= cols) throw SyntaxError(line_no, col_no, "too many tokens in row");
      layout.at(r, c) = parse_token(tok, line_no, col_no);
      ++c;
      if (end == std::string::npos) break;
      pos = end;
    }
    if (c != cols) throw SyntaxError(line_no, static_cast<int>(line.size()) + 1, "too few tokens in row");
  }
  if (next_content_line()) throw SyntaxError(line_no, 1, "trailing content after grid");

  layout.validate();
  return layout;
}

std::string serialize_layout(const Layout& layout) {
  std::ostringstream out;
  out << layout.rows() << ' ' << layout.cols() << '\n';
  for (int r = 0; r < layout.rows(); ++r) {
    for (int c = 0; c < layout.cols(); ++c) {
      const CellSpec& cell = layout.at(r, c);
      if (c > 0) out << ' ';
      switch (cell.kind) {
        case CellKind::Void: out << '.'; break;
        case CellKind::Workstation: out << 'W' << cell.id; break;
        case CellKind::DropOff: out << 'D' << cell.id; break;
        case CellKind::Ordinary:
          for (Heading h : kHeadings)
            if (cell.headings.contains(h)) out << heading_char(h);
          break;
      }
    }
    out << '\n';
  }
  return out.str();
}

Layout load_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open layout file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_layout(ss.str());
}

}  // namespace rss
