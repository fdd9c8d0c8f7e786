#include "phsem/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace phsem {

using nlohmann::json;

namespace {

std::map<std::string, int> name_index_map(
    const std::vector<std::string>& nodes) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].empty()) throw InputError("empty node name");
        if (!index.emplace(nodes[i], static_cast<int>(i)).second)
            throw InputError("duplicate node name: " + nodes[i]);
    }
    return index;
}

}  // namespace

int node_index(const GraphDocument& doc, const std::string& name) {
    for (std::size_t i = 0; i < doc.nodes.size(); ++i)
        if (doc.nodes[i] == name) return static_cast<int>(i);
    throw InputError("unknown node name: " + name);
}

GraphDocument parse_graph_document(const json& j) {
    if (!j.is_object()) throw InputError("graph document must be an object");
    GraphDocument doc;
    if (!j.contains("nodes") || !j.at("nodes").is_array())
        throw InputError("graph document needs a 'nodes' array");
    for (const auto& n : j.at("nodes")) {
        if (!n.is_string()) throw InputError("node names must be strings");
        doc.nodes.push_back(n.get<std::string>());
    }
    const auto index = name_index_map(doc.nodes);

    if (j.contains("edges")) {
        if (!j.at("edges").is_array())
            throw InputError("'edges' must be an array");
        std::set<std::pair<int, int>> pairs;
        for (const auto& e : j.at("edges")) {
            GraphEdgeSpec spec;
            if (!e.is_object() || !e.contains("from") || !e.contains("to"))
                throw InputError("edges need 'from' and 'to' fields");
            spec.from = e.at("from").get<std::string>();
            spec.to = e.at("to").get<std::string>();
            spec.directed = e.value("directed", true);
            if (!index.count(spec.from))
                throw InputError("edge references unknown node: " + spec.from);
            if (!index.count(spec.to))
                throw InputError("edge references unknown node: " + spec.to);
            if (spec.from == spec.to)
                throw InputError("self-loop on node: " + spec.from);
            const int a = index.at(spec.from), b = index.at(spec.to);
            if (!pairs.emplace(std::min(a, b), std::max(a, b)).second)
                throw InputError("multiple edges between " + spec.from +
                                 " and " + spec.to);
            doc.edges.push_back(std::move(spec));
        }
    }

    if (j.contains("partition") && !j.at("partition").is_null()) {
        if (!j.at("partition").is_array())
            throw InputError("'partition' must be an array of arrays");
        std::vector<std::vector<std::string>> blocks;
        for (const auto& b : j.at("partition")) {
            if (!b.is_array())
                throw InputError("partition blocks must be arrays");
            std::vector<std::string> block;
            for (const auto& n : b) block.push_back(n.get<std::string>());
            if (block.empty()) throw InputError("empty partition block");
            blocks.push_back(std::move(block));
        }
        doc.partition = std::move(blocks);
    }
    return doc;
}

GraphDocument parse_graph_document_text(const std::string& text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw InputError("invalid JSON");
    return parse_graph_document(j);
}

json graph_document_to_json(const GraphDocument& doc) {
    json j;
    j["nodes"] = doc.nodes;
    j["edges"] = json::array();
    for (const auto& e : doc.edges)
        j["edges"].push_back(
            {{"from", e.from}, {"to", e.to}, {"directed", e.directed}});
    if (doc.partition) j["partition"] = *doc.partition;
    return j;
}

GraphDocument canonicalize(GraphDocument doc) {
    const auto index = name_index_map(doc.nodes);
    for (auto& e : doc.edges)
        if (!e.directed && index.at(e.from) > index.at(e.to))
            std::swap(e.from, e.to);
    std::sort(doc.edges.begin(), doc.edges.end(),
              [&](const GraphEdgeSpec& a, const GraphEdgeSpec& b) {
                  return std::pair(index.at(a.from), index.at(a.to)) <
                         std::pair(index.at(b.from), index.at(b.to));
              });
    if (doc.partition) {
        for (auto& block : *doc.partition)
            std::sort(block.begin(), block.end(),
                      [&](const std::string& a, const std::string& b) {
                          return index.at(a) < index.at(b);
                      });
        std::sort(doc.partition->begin(), doc.partition->end(),
                  [&](const auto& a, const auto& b) {
                      return index.at(a.front()) < index.at(b.front());
                  });
    }
    return doc;
}

Dag dag_from_document(const GraphDocument& doc) {
    const auto index = name_index_map(doc.nodes);
    std::vector<Edge> edges;
    for (const auto& e : doc.edges) {
        if (!e.directed)
            throw InputError("expected a DAG but found undirected edge " +
                             e.from + " - " + e.to);
        edges.emplace_back(index.at(e.from), index.at(e.to));
    }
    try {
        return Dag(static_cast<int>(doc.nodes.size()), std::move(edges));
    } catch (const CyclicGraphError&) {
        throw InputError("graph has a directed cycle");
    }
}

Pdag pdag_from_document(const GraphDocument& doc) {
    const auto index = name_index_map(doc.nodes);
    Pdag out(static_cast<int>(doc.nodes.size()));
    for (const auto& e : doc.edges) {
        const int i = index.at(e.from), j = index.at(e.to);
        try {
            if (e.directed)
                out.add_directed(i, j);
            else
                out.add_undirected(i, j);
        } catch (const Error&) {
            throw InputError("conflicting edges between " + e.from + " and " +
                             e.to);
        }
    }
    return out;
}

GraphDocument document_from_dag(const Dag& g,
                                const std::vector<std::string>& names) {
    if (static_cast<int>(names.size()) != g.node_count())
        throw InputError("name list and graph disagree on p");
    GraphDocument doc;
    doc.nodes = names;
    for (const auto& [i, j] : g.edges())
        doc.edges.push_back({names[i], names[j], true});
    return canonicalize(std::move(doc));
}

GraphDocument document_from_pdag(const Pdag& g,
                                 const std::vector<std::string>& names) {
    if (static_cast<int>(names.size()) != g.node_count())
        throw InputError("name list and graph disagree on p");
    GraphDocument doc;
    doc.nodes = names;
    for (const auto& [i, j] : g.directed_edges())
        doc.edges.push_back({names[i], names[j], true});
    for (const auto& [i, j] : g.undirected_edges())
        doc.edges.push_back({names[i], names[j], false});
    return canonicalize(std::move(doc));
}

Partition partition_from_json(const json& j,
                              const std::vector<std::string>& nodes) {
    const json* blocks_json = &j;
    if (j.is_object()) {
        if (!j.contains("partition"))
            throw InputError("expected a 'partition' field");
        blocks_json = &j.at("partition");
    }
    if (!blocks_json->is_array())
        throw InputError("partition must be an array of arrays");

    const auto index = name_index_map(nodes);
    std::vector<NodeSet> blocks;
    std::vector<std::uint8_t> seen(nodes.size(), 0);
    for (const auto& b : *blocks_json) {
        if (!b.is_array()) throw InputError("partition blocks must be arrays");
        NodeSet block;
        for (const auto& n : b) {
            const std::string name = n.get<std::string>();
            auto it = index.find(name);
            if (it == index.end())
                throw InputError("partition references unknown node: " + name);
            if (seen[it->second])
                throw InputError("node in two partition blocks: " + name);
            seen[it->second] = 1;
            block.push_back(it->second);
        }
        if (block.empty()) throw InputError("empty partition block");
        std::sort(block.begin(), block.end());
        blocks.push_back(std::move(block));
    }
    for (std::size_t v = 0; v < nodes.size(); ++v)
        if (!seen[v])
            throw InputError("node missing from partition: " + nodes[v]);
    return Partition::from_blocks(static_cast<int>(nodes.size()), blocks);
}

std::vector<std::vector<std::string>> partition_to_names(
    const Partition& pi, const std::vector<std::string>& nodes) {
    std::vector<std::vector<std::string>> out;
    for (const NodeSet& block : pi.blocks()) {
        std::vector<std::string> names;
        for (NodeId v : block) names.push_back(nodes[v]);
        out.push_back(std::move(names));
    }
    return out;
}

std::vector<std::string> default_node_names(int p) {
    std::vector<std::string> names(p);
    for (int v = 0; v < p; ++v) names[v] = std::to_string(v + 1);
    return names;
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_data_csv(const std::filesystem::path& path,
                    const std::vector<std::string>& names,
                    const Eigen::MatrixXd& x) {
    if (static_cast<Eigen::Index>(names.size()) != x.cols())
        throw InputError("name list and data disagree on column count");
    std::ostringstream out;
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (c) out << ',';
        out << names[c];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            if (c) out << ',';
            out << format_double(x(r, c));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

CsvData read_data_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty CSV file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    CsvData data;
    data.names = split_csv_line(line);
    if (data.names.empty()) throw InputError("CSV header has no columns");
    name_index_map(data.names);  // validates uniqueness

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != data.names.size())
            throw InputError("CSV row has " + std::to_string(fields.size()) +
                             " fields, expected " +
                             std::to_string(data.names.size()));
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            try {
                std::size_t pos = 0;
                row[c] = std::stod(fields[c], &pos);
                if (pos != fields[c].size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw InputError("invalid number in CSV: '" + fields[c] + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("CSV has no data rows");

    data.x.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(data.names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < data.names.size(); ++c)
            data.x(static_cast<Eigen::Index>(r),
                   static_cast<Eigen::Index>(c)) = rows[r][c];
    return data;
}

SimConfig parse_sim_config(const json& j) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    SimConfig cfg;
    try {
        cfg.p = j.at("p").get<int>();
        cfg.n = j.at("n").get<long>();
    } catch (const json::exception&) {
        throw InputError("config needs integer fields 'p' and 'n'");
    }
    if (cfg.p < 2) throw InputError("config needs p >= 2");
    if (cfg.n < 2) throw InputError("config needs n >= 2");

    const std::string regime = j.value("regime", std::string("sparse"));
    if (regime == "sparse")
        cfg.regime = Regime::sparse;
    else if (regime == "dense")
        cfg.regime = Regime::dense;
    else
        throw InputError("regime must be 'sparse' or 'dense'");

    if (j.contains("blocks")) {
        const json& b = j.at("blocks");
        if (b.is_string()) {
            const std::string name = b.get<std::string>();
            if (name == "two_blocks")
                cfg.blocks = BlockRecipe::two_blocks;
            else if (name == "p_over_3_plus_1")
                cfg.blocks = BlockRecipe::p_over_3_plus_1;
            else
                throw InputError("unknown block recipe: " + name);
        } else if (b.is_array()) {
            cfg.blocks = BlockRecipe::custom;
            const std::vector<std::string> names = default_node_names(cfg.p);
            cfg.custom_blocks = partition_from_json(b, names).blocks();
        } else {
            throw InputError("'blocks' must be a recipe name or block list");
        }
    }

    cfg.replicates = j.value("replicates", 1);
    if (cfg.replicates < 1) throw InputError("replicates must be >= 1");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.restarts = j.value("restarts", 5);
    cfg.neighborhood_cap = j.value("neighborhood_cap", std::size_t{300});
    cfg.max_iters = j.value("max_iters", 500);
    if (cfg.restarts < 1 || cfg.neighborhood_cap < 1 || cfg.max_iters < 1)
        throw InputError("search settings must be positive");
    return cfg;
}

SimConfig read_sim_config(const std::filesystem::path& path) {
    return parse_sim_config(read_json_file(path));
}

nlohmann::json sem_params_to_json(const Dag& g, const SemParams& params,
                                  const std::vector<std::string>& names) {
    json weights = json::array();
    for (const auto& [i, j] : g.edges())
        weights.push_back({{"from", names[i]},
                           {"to", names[j]},
                           {"value", params.lambda(i, j)}});
    json omega = json::object();
    for (int v = 0; v < g.node_count(); ++v)
        omega[names[v]] = params.omega(v);
    return json{{"weights", weights}, {"error_variances", omega}};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("failed writing " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    json j = json::parse(read_text_file(path), nullptr,
                         /*allow_exceptions=*/false);
    if (j.is_discarded())
        throw InputError("invalid JSON in " + path.string());
    return j;
}

}  // namespace phsem
