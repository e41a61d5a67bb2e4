#pragma once

#include "nmp/network.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace nmp {

inline constexpr int kDefaultMaxRadius = 4;

// Edge set of the radius-r neighborhood of a focal node: all incident edges
// plus every edge on a simple cycle through the focal node of length <= r+2.
struct Neighborhood {
    NodeId focal = 0;
    int radius = 0;
    std::uint64_t structure_id = 0;
    std::vector<EdgeId> edges; // sorted
    NodeSet nodes;             // endpoints of `edges`, plus the focal node
};

// Edges of N_i that are not in N_j.
struct ConditionalNeighborhood {
    NodeId focal = 0;
    NodeId excluded_owner = 0;
    std::vector<EdgeId> edges; // sorted
};

Neighborhood build_neighborhood(const Network& net, NodeId focal, int radius,
                                int max_radius = kDefaultMaxRadius);

// Throws UsageError if the two neighborhoods were built at different radii,
// on different structures, or share a focal node.
ConditionalNeighborhood build_conditional(const Neighborhood& of, const Neighborhood& excluded);

// Neighborhoods for every node of a network at one radius.
class NeighborhoodCache {
public:
    NeighborhoodCache(const Network& net, int radius, int max_radius = kDefaultMaxRadius,
                      int threads = 1);

    int radius() const { return radius_; }
    int node_count() const { return static_cast<int>(all_.size()); }
    const Neighborhood& operator[](NodeId i) const { return all_[static_cast<std::size_t>(i)]; }
    std::span<const Neighborhood> all() const { return all_; }

    // Largest hop distance from a focal node to any node of its own
    // neighborhood, using neighborhood edges only.
    int max_lookback() const { return max_lookback_; }

private:
    int radius_;
    std::vector<Neighborhood> all_;
    int max_lookback_ = 0;
};

// Message (node, owner) stands for the probability that `node` is infected
// through a path avoiding the edges of N_owner.
struct MessageId {
    NodeId node;
    NodeId owner;
    friend bool operator==(const MessageId&, const MessageId&) = default;
    friend auto operator<=>(const MessageId&, const MessageId&) = default;
};

class MessageIndex {
public:
    MessageIndex() = default;
    explicit MessageIndex(const NeighborhoodCache& cache);

    std::size_t size() const { return ids_.size(); }
    const MessageId& operator[](std::size_t m) const { return ids_[m]; }
    std::span<const MessageId> ids() const { return ids_; }

    std::optional<std::size_t> find(NodeId node, NodeId owner) const;
    // Messages whose owner is `owner` (the inputs consumed at that node).
    std::span<const MessageId> owned_by(NodeId owner) const;
    std::size_t first_owned_by(NodeId owner) const { return owner_begin_[static_cast<std::size_t>(owner)]; }

private:
    std::vector<MessageId> ids_; // sorted by (owner, node)
    std::vector<std::size_t> owner_begin_;
};

MessageIndex build_message_index(const NeighborhoodCache& cache);

// CSV diagnostic: node,radius,edges,nodes
void write_neighborhood_sizes(std::ostream& out, const NeighborhoodCache& cache);

} // namespace nmp
