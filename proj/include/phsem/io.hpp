#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phsem/experiment.hpp"
#include "phsem/graph.hpp"
#include "phsem/sem.hpp"

#include <nlohmann/json_fwd.hpp>

namespace phsem {

// JSON-facing graph description. Node names are unique strings; the order
// of the nodes array defines the dense id mapping. An edge with
// directed=false is an undirected CPDAG edge.
struct GraphEdgeSpec {
    std::string from;
    std::string to;
    bool directed = true;

    friend bool operator==(const GraphEdgeSpec&,
                           const GraphEdgeSpec&) = default;
};

struct GraphDocument {
    std::vector<std::string> nodes;
    std::vector<GraphEdgeSpec> edges;
    std::optional<std::vector<std::vector<std::string>>> partition;

    friend bool operator==(const GraphDocument&,
                           const GraphDocument&) = default;
};

// Parsing validates names and references and throws InputError with the
// offending name in the message.
GraphDocument parse_graph_document(const nlohmann::json& j);
GraphDocument parse_graph_document_text(const std::string& text);
nlohmann::json graph_document_to_json(const GraphDocument& doc);

// Canonical form: edges sorted by (from-index, to-index) with undirected
// pairs normalized to the smaller index first; partition blocks sorted.
GraphDocument canonicalize(GraphDocument doc);

int node_index(const GraphDocument& doc, const std::string& name);

Dag dag_from_document(const GraphDocument& doc);    // all edges directed
Pdag pdag_from_document(const GraphDocument& doc);  // mixed allowed

GraphDocument document_from_dag(const Dag& g,
                                const std::vector<std::string>& names);
GraphDocument document_from_pdag(const Pdag& g,
                                 const std::vector<std::string>& names);

// Partition from blocks of node names (a bare JSON array of arrays, or an
// object with a "partition" field).
Partition partition_from_json(const nlohmann::json& j,
                              const std::vector<std::string>& nodes);
std::vector<std::vector<std::string>> partition_to_names(
    const Partition& pi, const std::vector<std::string>& nodes);

// Default node names "1".."p" (the convention of the simulate command).
std::vector<std::string> default_node_names(int p);

// Data CSV: header row of node names, one row per sample, full precision.
void write_data_csv(const std::filesystem::path& path,
                    const std::vector<std::string>& names,
                    const Eigen::MatrixXd& x);
struct CsvData {
    std::vector<std::string> names;
    Eigen::MatrixXd x;
};
CsvData read_data_csv(const std::filesystem::path& path);

// Simulation / experiment configuration.
SimConfig parse_sim_config(const nlohmann::json& j);
SimConfig read_sim_config(const std::filesystem::path& path);

// SEM parameters as JSON (edge weight list plus per-node error variances).
nlohmann::json sem_params_to_json(const Dag& g, const SemParams& params,
                                  const std::vector<std::string>& names);

// File helpers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

// Full-precision decimal rendering that round-trips doubles.
std::string format_double(double value);

}  // namespace phsem
