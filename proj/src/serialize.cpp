#include "htmax/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "htmax/errors.hpp"

namespace htmax {

using nlohmann::json;

std::string to_json(const HtTensor& a) {
    json j;
    j["d"] = a.order();
    j["mode_sizes"] = a.mode_sizes;
    json tree = json::array();
    for (int t = 0; t < a.tree.node_count(); ++t) {
        const auto& nd = a.tree.node(t);
        json rec;
        rec["id"] = t;
        rec["subset"] = nd.modes;
        if (nd.left >= 0) rec["children"] = {nd.left, nd.right};
        tree.push_back(std::move(rec));
    }
    j["tree"] = std::move(tree);
    j["ranks"] = a.ranks;
    json frames = json::object();
    json transfers = json::object();
    for (int t = 0; t < a.tree.node_count(); ++t) {
        if (a.tree.is_leaf(t))
            frames[std::to_string(t)] = a.leaf_frames[t].data();
        else
            transfers[std::to_string(t)] = a.transfer[t];
    }
    j["leaf_frames"] = std::move(frames);
    j["transfer_tensors"] = std::move(transfers);
    return j.dump(2);
}

HtTensor from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("container parse error: ") + e.what());
    }
    try {
        const int d = j.at("d").get<int>();
        HtTensor a;
        a.mode_sizes = j.at("mode_sizes").get<std::vector<int>>();
        if (static_cast<int>(a.mode_sizes.size()) != d)
            throw ValidationError("container: mode_sizes length does not match d");

        const json& tj = j.at("tree");
        std::vector<DimensionTree::Node> nodes(tj.size());
        for (const json& rec : tj) {
            const int id = rec.at("id").get<int>();
            if (id < 0 || id >= static_cast<int>(nodes.size()))
                throw ValidationError("container: tree node id out of range");
            DimensionTree::Node& n = nodes[id];
            n.modes = rec.at("subset").get<std::vector<int>>();
            if (rec.contains("children")) {
                const auto c = rec.at("children").get<std::vector<int>>();
                if (c.size() != 2)
                    throw ValidationError("container: node must have 0 or 2 children");
                n.left = c[0];
                n.right = c[1];
            }
        }
        a.tree = DimensionTree::from_nodes(std::move(nodes));

        a.ranks = j.at("ranks").get<std::vector<int>>();
        a.leaf_frames.resize(a.tree.node_count());
        a.transfer.resize(a.tree.node_count());
        if (static_cast<int>(a.ranks.size()) != a.tree.node_count())
            throw ValidationError("container: ranks length mismatch");

        const json& frames = j.at("leaf_frames");
        const json& transfers = j.at("transfer_tensors");
        for (int t = 0; t < a.tree.node_count(); ++t) {
            const std::string key = std::to_string(t);
            if (a.tree.is_leaf(t)) {
                const auto vals = frames.at(key).get<std::vector<double>>();
                const int mu = a.tree.mode_of(t);
                const std::size_t rows = static_cast<std::size_t>(a.mode_sizes[mu - 1]);
                const std::size_t cols = static_cast<std::size_t>(a.ranks[t]);
                if (vals.size() != rows * cols)
                    throw ValidationError("container: leaf frame size mismatch");
                Matrix u(rows, cols);
                u.data() = vals;
                a.leaf_frames[t] = std::move(u);
            } else {
                a.transfer[t] = transfers.at(key).get<std::vector<double>>();
            }
        }
        a.validate();
        return a;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("container field error: ") + e.what());
    }
}

void save_tensor(const HtTensor& a, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open output file: " + path);
    os << to_json(a) << '\n';
    if (!os) throw ValidationError("write failed: " + path);
}

HtTensor load_tensor(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open input file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return from_json(ss.str());
}

} // namespace htmax
