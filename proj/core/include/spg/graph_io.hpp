#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "spg/graph.hpp"

namespace spg {

enum class GraphFormat {
  EdgeList,      // "u v" or "u v w" per line, 0-based, '#' comments
  MatrixMarket,  // coordinate pattern/real, 1-based
};

GraphFormat parse_graph_format(const std::string& name);

struct LoadOptions {
  // Used when the file carries no header. Edge lists written by save_graph
  // carry "# spg-edgelist n=<n> directed=<0|1> weighted=<0|1>".
  bool directed = false;
  // Minimum vertex count; the file may extend it.
  std::size_t num_vertices = 0;
};

Graph load_graph(const std::filesystem::path& path, GraphFormat format,
                 const LoadOptions& options = {});
void save_graph(const Graph& g, const std::filesystem::path& path,
                GraphFormat format);

Graph read_edge_list(std::istream& in, const LoadOptions& options = {});
void write_edge_list(const Graph& g, std::ostream& out);
Graph read_matrix_market(std::istream& in);
void write_matrix_market(const Graph& g, std::ostream& out);

/// External string ids mapped to dense vertex ids in first-seen order.
struct IdDictionary {
  std::vector<std::string> names;
  std::unordered_map<std::string, VertexId> index;

  VertexId intern(const std::string& name);
};

struct LabeledGraph {
  Graph graph;
  IdDictionary ids;
};

/// Edge list whose endpoints are arbitrary whitespace-free tokens.
LabeledGraph read_labeled_edge_list(std::istream& in, bool directed = false);
void write_id_dictionary(const IdDictionary& ids, std::ostream& out);

/// Attribute sidecar: CSV with header "vertex,category,x1,...,xd".
VertexAttributes read_attributes_csv(std::istream& in,
                                     std::size_t num_categories = 0);
void write_attributes_csv(const VertexAttributes& attrs, std::ostream& out);
VertexAttributes load_attributes(const std::filesystem::path& path,
                                 std::size_t num_categories = 0);
void save_attributes(const VertexAttributes& attrs,
                     const std::filesystem::path& path);

}  // namespace spg
