#include "spg/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <cctype>

#include "spg/error.hpp"

namespace spg {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_char(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && p == tok.data() + tok.size();
}

std::uint64_t parse_index(std::string_view tok, std::size_t line_no,
                          const std::string& line) {
  std::uint64_t v = 0;
  if (!parse_number(tok, v)) {
    throw ParseError("malformed line '" + line + "'", line_no);
  }
  return v;
}

void check_index_range(std::uint64_t v, std::size_t line_no) {
  if (v > std::numeric_limits<VertexId>::max() - 1) {
    throw ParseError("vertex index " + std::to_string(v) + " out of range",
                     line_no);
  }
}

// Reads "key=value" pairs out of the edge-list header comment.
void parse_header(std::string_view comment, std::size_t& n, bool& directed,
                  bool& weighted, bool& seen) {
  auto toks = split_ws(comment);
  if (toks.empty() || toks.front() != "spg-edgelist") return;
  seen = true;
  for (auto tok : toks) {
    auto eq = tok.find('=');
    if (eq == std::string_view::npos) continue;
    auto key = tok.substr(0, eq);
    auto val = tok.substr(eq + 1);
    std::uint64_t x = 0;
    if (!parse_number(val, x)) continue;
    if (key == "n") n = x;
    if (key == "directed") directed = x != 0;
    if (key == "weighted") weighted = x != 0;
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

}  // namespace

GraphFormat parse_graph_format(const std::string& name) {
  if (name == "edgelist" || name == "edge-list" || name == "el")
    return GraphFormat::EdgeList;
  if (name == "mtx" || name == "matrix-market" || name == "matrixmarket")
    return GraphFormat::MatrixMarket;
  throw ConfigError("unknown graph format '" + name + "'");
}

Graph read_edge_list(std::istream& in, const LoadOptions& options) {
  std::size_t n = options.num_vertices;
  bool directed = options.directed;
  bool weighted = false;
  bool header = false;
  std::vector<Edge> edges;
  std::uint64_t max_id = 0;
  bool any = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) {
      if (line_no == 1 || !header)
        parse_header(view.substr(hash + 1), n, directed, weighted, header);
      view = view.substr(0, hash);
    }
    auto toks = split_ws(view);
    if (toks.empty()) continue;
    if (toks.size() != 2 && toks.size() != 3) {
      throw ParseError("malformed line '" + line + "'", line_no);
    }
    const auto u = parse_index(toks[0], line_no, line);
    const auto v = parse_index(toks[1], line_no, line);
    check_index_range(u, line_no);
    check_index_range(v, line_no);
    double w = 1.0;
    if (toks.size() == 3) {
      if (!parse_number(toks[2], w)) {
        throw ParseError("malformed weight in line '" + line + "'", line_no);
      }
      weighted = true;
    }
    if (header && (u >= n || v >= n)) {
      throw ParseError("vertex index out of declared range n=" +
                           std::to_string(n),
                       line_no);
    }
    max_id = std::max({max_id, u, v});
    any = true;
    edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), w});
  }
  if (any) n = std::max<std::size_t>(n, max_id + 1);
  return Graph::from_edges(n, edges, directed, weighted);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  out << "# spg-edgelist n=" << g.num_vertices()
      << " directed=" << (g.directed() ? 1 : 0)
      << " weighted=" << (g.weighted() ? 1 : 0) << '\n';
  const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
  for (const Edge& e : g.edges()) {
    out << e.u << ' ' << e.v;
    if (g.weighted()) out << ' ' << e.weight;
    out << '\n';
  }
  out.precision(prec);
}

Graph read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market file", 1);
  ++line_no;
  auto banner = split_ws(line);
  if (banner.size() < 5 || banner[0] != "%%MatrixMarket" ||
      banner[1] != "matrix" || banner[2] != "coordinate") {
    throw ParseError("expected '%%MatrixMarket matrix coordinate' banner",
                     line_no);
  }
  const bool pattern = banner[3] == "pattern";
  if (!pattern && banner[3] != "real" && banner[3] != "integer") {
    throw ParseError("unsupported field type", line_no);
  }
  const bool symmetric = banner[4] == "symmetric";
  if (!symmetric && banner[4] != "general") {
    throw ParseError("unsupported symmetry", line_no);
  }

  std::uint64_t rows = 0, cols = 0, entries = 0;
  bool have_size = false;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '%') continue;
    auto toks = split_ws(view);
    if (!have_size) {
      if (toks.size() != 3 || !parse_number(toks[0], rows) ||
          !parse_number(toks[1], cols) || !parse_number(toks[2], entries)) {
        throw ParseError("malformed size line '" + line + "'", line_no);
      }
      if (rows != cols) throw ParseError("adjacency must be square", line_no);
      have_size = true;
      edges.reserve(entries);
      continue;
    }
    if (toks.size() != (pattern ? 2u : 3u)) {
      throw ParseError("malformed line '" + line + "'", line_no);
    }
    const auto i = parse_index(toks[0], line_no, line);
    const auto j = parse_index(toks[1], line_no, line);
    if (i < 1 || j < 1 || i > rows || j > cols) {
      throw ParseError("index out of range in line '" + line + "'", line_no);
    }
    double w = 1.0;
    if (!pattern && !parse_number(toks[2], w)) {
      throw ParseError("malformed value in line '" + line + "'", line_no);
    }
    edges.push_back({static_cast<VertexId>(i - 1), static_cast<VertexId>(j - 1),
                     w});
  }
  if (!have_size) throw ParseError("missing size line", line_no);
  if (edges.size() != entries) {
    throw ParseError("expected " + std::to_string(entries) + " entries, read " +
                         std::to_string(edges.size()),
                     line_no);
  }
  return Graph::from_edges(rows, edges, !symmetric, !pattern);
}

void write_matrix_market(const Graph& g, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate "
      << (g.weighted() ? "real" : "pattern") << ' '
      << (g.directed() ? "general" : "symmetric") << '\n';
  auto edges = g.edges();
  out << g.num_vertices() << ' ' << g.num_vertices() << ' ' << edges.size()
      << '\n';
  const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
  for (const Edge& e : edges) {
    // Symmetric storage keeps the lower triangle.
    VertexId r = e.u, c = e.v;
    if (!g.directed() && r < c) std::swap(r, c);
    out << r + 1 << ' ' << c + 1;
    if (g.weighted()) out << ' ' << e.weight;
    out << '\n';
  }
  out.precision(prec);
}

Graph load_graph(const std::filesystem::path& path, GraphFormat format,
                 const LoadOptions& options) {
  auto in = open_in(path);
  try {
    return format == GraphFormat::EdgeList ? read_edge_list(in, options)
                                           : read_matrix_market(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void save_graph(const Graph& g, const std::filesystem::path& path,
                GraphFormat format) {
  auto out = open_out(path);
  if (format == GraphFormat::EdgeList) {
    write_edge_list(g, out);
  } else {
    write_matrix_market(g, out);
  }
  if (!out) throw Error("write failed: " + path.string());
}

VertexId IdDictionary::intern(const std::string& name) {
  auto [it, inserted] =
      index.try_emplace(name, static_cast<VertexId>(names.size()));
  if (inserted) names.push_back(name);
  return it->second;
}

LabeledGraph read_labeled_edge_list(std::istream& in, bool directed) {
  LabeledGraph out;
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    auto toks = split_ws(view);
    if (toks.empty()) continue;
    if (toks.size() != 2) {
      throw ParseError("malformed line '" + line + "'", line_no);
    }
    const VertexId u = out.ids.intern(std::string(toks[0]));
    const VertexId v = out.ids.intern(std::string(toks[1]));
    edges.push_back({u, v, 1.0});
  }
  out.graph = Graph::from_edges(out.ids.names.size(), edges, directed);
  return out;
}

void write_id_dictionary(const IdDictionary& ids, std::ostream& out) {
  out << "vertex,name\n";
  for (std::size_t i = 0; i < ids.names.size(); ++i)
    out << i << ',' << ids.names[i] << '\n';
}

VertexAttributes read_attributes_csv(std::istream& in,
                                     std::size_t num_categories) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty attribute file", 1);
  ++line_no;
  auto header = split_char(trim(line), ',');
  if (header.size() < 2 || trim(header[0]) != "vertex" ||
      trim(header[1]) != "category") {
    throw ParseError("attribute header must start with 'vertex,category'",
                     line_no);
  }
  VertexAttributes attrs;
  attrs.dimension = header.size() - 2;

  struct Row {
    std::uint64_t vertex;
    std::uint32_t category;
    std::vector<double> x;
  };
  std::vector<Row> rows;
  std::uint32_t max_cat = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty()) continue;
    auto cells = split_char(view, ',');
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " columns",
                       line_no);
    }
    Row r;
    if (!parse_number(trim(cells[0]), r.vertex) ||
        !parse_number(trim(cells[1]), r.category)) {
      throw ParseError("malformed line '" + line + "'", line_no);
    }
    r.x.resize(attrs.dimension);
    for (std::size_t k = 0; k < attrs.dimension; ++k) {
      if (!parse_number(trim(cells[k + 2]), r.x[k])) {
        throw ParseError("malformed feature in line '" + line + "'", line_no);
      }
    }
    max_cat = std::max(max_cat, r.category);
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.vertex < b.vertex; });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].vertex != i) {
      throw ParseError("attribute rows must cover vertices 0..n-1 exactly once",
                       0);
    }
    attrs.categories.push_back(rows[i].category);
    attrs.features.insert(attrs.features.end(), rows[i].x.begin(),
                          rows[i].x.end());
  }
  attrs.num_categories =
      num_categories ? num_categories : (rows.empty() ? 0 : max_cat + 1u);
  attrs.validate();
  return attrs;
}

void write_attributes_csv(const VertexAttributes& attrs, std::ostream& out) {
  out << "vertex,category";
  for (std::size_t k = 0; k < attrs.dimension; ++k) out << ",x" << k + 1;
  out << '\n';
  const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    out << i << ',' << attrs.categories[i];
    for (double x : attrs.feature(static_cast<VertexId>(i))) out << ',' << x;
    out << '\n';
  }
  out.precision(prec);
}

VertexAttributes load_attributes(const std::filesystem::path& path,
                                 std::size_t num_categories) {
  auto in = open_in(path);
  return read_attributes_csv(in, num_categories);
}

void save_attributes(const VertexAttributes& attrs,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  write_attributes_csv(attrs, out);
}

}  // namespace spg
