#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnet/channel_grid.hpp"

namespace qnet {

enum class Attachment { deployed, local };

const char* to_string(Attachment a);
Attachment attachment_from_string(const std::string& s);

struct User {
    std::string id;
    Attachment attachment{Attachment::local};
    /// One-way fibre loss in dB. Zero for local users.
    double deployed_loss_db{0.0};
};

/// Unordered pair of user ids, stored in canonical (sorted) order.
struct UserPair {
    std::string a;
    std::string b;

    UserPair() = default;
    UserPair(std::string u, std::string v);

    std::string id() const { return a + "-" + b; }

    friend bool operator==(const UserPair&, const UserPair&) = default;
    friend auto operator<=>(const UserPair&, const UserPair&) = default;
};

enum class LinkScenario { local_local, deployed_local, deployed_deployed };

const char* to_string(LinkScenario s);

/// Lookup table of users, preserving declaration order.
class UserDirectory {
public:
    UserDirectory() = default;
    explicit UserDirectory(std::vector<User> users);

    const std::vector<User>& users() const { return users_; }
    bool contains(const std::string& id) const;
    const User& at(const std::string& id) const;  // throws std::out_of_range
    size_t size() const { return users_.size(); }

    LinkScenario scenario_of(const UserPair& link) const;

    /// All n(n-1)/2 unordered pairs, canonically ordered.
    std::vector<UserPair> all_pairs() const;

    /// Split a composite link id ("Alice-Bob") back into a user pair.
    /// Throws std::invalid_argument if no split or more than one split
    /// matches the directory.
    UserPair resolve_link_id(const std::string& link_id) const;

private:
    std::vector<User> users_;
    std::map<std::string, size_t> index_;
};

LinkScenario scenario_of(const User& u, const User& v);

/// One fan-out port of a logical channel granted to a user.
struct Grant {
    std::string user_id;
    LogicalChannel channel;
    int port{0};

    friend bool operator==(const Grant&, const Grant&) = default;
};

/// Which users receive copies of which logical channels.
///
/// Enforced on every mutation: LC 0 is never granted, a channel's fan-out
/// never exceeds its port capacity (4 split / 1 unsplit), no port is
/// double-booked, and a user never holds two copies of the same channel.
class ChannelAssignment {
public:
    explicit ChannelAssignment(GridConfig grid = GridConfig{});

    const GridConfig& grid() const { return grid_; }

    /// Grant `channel` to `user_id` on the lowest free port.
    void add_grant(const std::string& user_id, LogicalChannel channel);
    /// Grant on an explicit port (used when loading a stored assignment).
    void add_grant(const std::string& user_id, LogicalChannel channel, int port);
    /// Remove a user's copy of a channel; returns false if absent.
    bool remove_grant(const std::string& user_id, LogicalChannel channel);

    bool holds(const std::string& user_id, LogicalChannel channel) const;
    std::vector<std::string> holders(LogicalChannel channel) const;
    int channel_count(const std::string& user_id) const;
    std::vector<LogicalChannel> channels_of(const std::string& user_id) const;

    /// Grants in deterministic order (channel, then port).
    std::vector<Grant> grants() const;
    size_t grant_count() const;
    bool empty() const { return grant_count() == 0; }

    /// Distinct conjugate pairs with at least one granted side.
    std::vector<ConjugatePair> pairs_used() const;

private:
    GridConfig grid_;
    // channel -> port -> user id, ports dense in [0, capacity)
    std::map<int, std::map<int, std::string>> ports_;
};

/// Served links and the conjugate pair(s) serving each.
struct LinkSet {
    std::map<UserPair, std::vector<ConjugatePair>> served;

    bool covers(const UserPair& p) const { return served.count(p) > 0; }
    size_t size() const { return served.size(); }
};

/// Every user pair {u, v} where one side holds +k and the other -k for some
/// pair k. Same-side copies are uncorrelated and never form a link, and a
/// user holding both signs of a pair does not link to itself.
LinkSet served_links(const ChannelAssignment& assignment);

struct MeshReport {
    size_t total_links{};
    size_t covered_links{};
    std::vector<UserPair> missing;
    std::map<std::string, int> channels_per_user;
    bool pass{};
};

/// Check full-mesh entanglement connectivity over the given users. Missing
/// links are reported, not thrown.
MeshReport verify_full_mesh(const ChannelAssignment& assignment, const UserDirectory& users);

}  // namespace qnet
