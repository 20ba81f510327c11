#include "qnet/topology.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace qnet {

const char* to_string(Attachment a) {
    return a == Attachment::deployed ? "deployed" : "local";
}

Attachment attachment_from_string(const std::string& s) {
    if (s == "deployed") return Attachment::deployed;
    if (s == "local") return Attachment::local;
    throw std::invalid_argument("unknown attachment '" + s + "' (expected deployed|local)");
}

UserPair::UserPair(std::string u, std::string v) {
    if (u == v) throw std::invalid_argument("user pair requires two distinct users, got '" + u + "' twice");
    if (v < u) std::swap(u, v);
    a = std::move(u);
    b = std::move(v);
}

const char* to_string(LinkScenario s) {
    switch (s) {
        case LinkScenario::local_local: return "L-L";
        case LinkScenario::deployed_local: return "D-L";
        case LinkScenario::deployed_deployed: return "D-D";
    }
    return "?";
}

UserDirectory::UserDirectory(std::vector<User> users) : users_(std::move(users)) {
    for (size_t i = 0; i < users_.size(); ++i) {
        const User& u = users_[i];
        if (u.id.empty()) throw std::invalid_argument("user with empty id");
        if (u.deployed_loss_db < 0)
            throw std::invalid_argument("user '" + u.id + "': negative fibre loss");
        if (!index_.emplace(u.id, i).second)
            throw std::invalid_argument("duplicate user id '" + u.id + "'");
    }
}

bool UserDirectory::contains(const std::string& id) const { return index_.count(id) > 0; }

const User& UserDirectory::at(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("unknown user '" + id + "'");
    return users_[it->second];
}

LinkScenario UserDirectory::scenario_of(const UserPair& link) const {
    return qnet::scenario_of(at(link.a), at(link.b));
}

std::vector<UserPair> UserDirectory::all_pairs() const {
    std::vector<UserPair> pairs;
    for (size_t i = 0; i < users_.size(); ++i)
        for (size_t j = i + 1; j < users_.size(); ++j)
            pairs.emplace_back(users_[i].id, users_[j].id);
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

UserPair UserDirectory::resolve_link_id(const std::string& link_id) const {
    std::optional<UserPair> found;
    for (size_t pos = link_id.find('-'); pos != std::string::npos; pos = link_id.find('-', pos + 1)) {
        std::string left = link_id.substr(0, pos);
        std::string right = link_id.substr(pos + 1);
        if (left != right && contains(left) && contains(right)) {
            UserPair candidate(left, right);
            if (found && *found != candidate)
                throw std::invalid_argument("ambiguous link id '" + link_id + "'");
            found = candidate;
        }
    }
    if (!found) throw std::invalid_argument("link id '" + link_id + "' does not name two known users");
    return *found;
}

LinkScenario scenario_of(const User& u, const User& v) {
    int deployed = (u.attachment == Attachment::deployed) + (v.attachment == Attachment::deployed);
    if (deployed == 2) return LinkScenario::deployed_deployed;
    if (deployed == 1) return LinkScenario::deployed_local;
    return LinkScenario::local_local;
}

ChannelAssignment::ChannelAssignment(GridConfig grid) : grid_(std::move(grid)) {
    grid_.validate();
}

void ChannelAssignment::add_grant(const std::string& user_id, LogicalChannel channel) {
    int capacity = grid_.port_capacity(channel);
    const auto& taken = ports_[channel.lc];
    int port = 0;
    while (port < capacity && taken.count(port)) ++port;
    add_grant(user_id, channel, port);
}

void ChannelAssignment::add_grant(const std::string& user_id, LogicalChannel channel, int port) {
    if (user_id.empty()) throw std::invalid_argument("grant with empty user id");
    if (channel.lc == 0) throw std::invalid_argument("LC 0 is never assignable to a user");
    if (!grid_.contains_lc(channel.lc))
        throw std::out_of_range("grant on LC " + std::to_string(channel.lc) + " outside grid");
    int capacity = grid_.port_capacity(channel);
    if (port < 0 || port >= capacity)
        throw std::invalid_argument("port " + std::to_string(port) + " out of range for LC " +
                                    std::to_string(channel.lc) + " (capacity " +
                                    std::to_string(capacity) + ")");
    if (holds(user_id, channel))
        throw std::invalid_argument("user '" + user_id + "' already holds LC " +
                                    std::to_string(channel.lc));
    auto& taken = ports_[channel.lc];
    if (taken.count(port))
        throw std::invalid_argument("port " + std::to_string(port) + " of LC " +
                                    std::to_string(channel.lc) + " already booked");
    taken.emplace(port, user_id);
}

bool ChannelAssignment::remove_grant(const std::string& user_id, LogicalChannel channel) {
    auto it = ports_.find(channel.lc);
    if (it == ports_.end()) return false;
    for (auto pit = it->second.begin(); pit != it->second.end(); ++pit) {
        if (pit->second == user_id) {
            it->second.erase(pit);
            if (it->second.empty()) ports_.erase(it);
            return true;
        }
    }
    return false;
}

bool ChannelAssignment::holds(const std::string& user_id, LogicalChannel channel) const {
    auto it = ports_.find(channel.lc);
    if (it == ports_.end()) return false;
    for (const auto& [port, uid] : it->second)
        if (uid == user_id) return true;
    return false;
}

std::vector<std::string> ChannelAssignment::holders(LogicalChannel channel) const {
    std::vector<std::string> out;
    auto it = ports_.find(channel.lc);
    if (it == ports_.end()) return out;
    for (const auto& [port, uid] : it->second) out.push_back(uid);
    return out;
}

int ChannelAssignment::channel_count(const std::string& user_id) const {
    int n = 0;
    for (const auto& [lc, taken] : ports_)
        for (const auto& [port, uid] : taken)
            if (uid == user_id) ++n;
    return n;
}

std::vector<LogicalChannel> ChannelAssignment::channels_of(const std::string& user_id) const {
    std::vector<LogicalChannel> out;
    for (const auto& [lc, taken] : ports_)
        for (const auto& [port, uid] : taken)
            if (uid == user_id) out.push_back(LogicalChannel{lc});
    return out;
}

std::vector<Grant> ChannelAssignment::grants() const {
    std::vector<Grant> out;
    for (const auto& [lc, taken] : ports_)
        for (const auto& [port, uid] : taken)
            out.push_back(Grant{uid, LogicalChannel{lc}, port});
    return out;
}

size_t ChannelAssignment::grant_count() const {
    size_t n = 0;
    for (const auto& [lc, taken] : ports_) n += taken.size();
    return n;
}

std::vector<ConjugatePair> ChannelAssignment::pairs_used() const {
    std::vector<ConjugatePair> out;
    for (const auto& [lc, taken] : ports_) {
        int k = std::abs(lc);
        if (out.empty() || out.back().k != k) {
            if (std::find(out.begin(), out.end(), ConjugatePair{k}) == out.end())
                out.push_back(ConjugatePair{k});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

LinkSet served_links(const ChannelAssignment& assignment) {
    LinkSet links;
    for (ConjugatePair pair : assignment.pairs_used()) {
        auto plus = assignment.holders(LogicalChannel{pair.k});
        auto minus = assignment.holders(LogicalChannel{-pair.k});
        for (const auto& u : plus) {
            for (const auto& v : minus) {
                if (u == v) continue;  // self-pairing carries no inter-user link
                UserPair link(u, v);
                auto& serving = links.served[link];
                if (std::find(serving.begin(), serving.end(), pair) == serving.end())
                    serving.push_back(pair);
            }
        }
    }
    return links;
}

MeshReport verify_full_mesh(const ChannelAssignment& assignment, const UserDirectory& users) {
    if (users.size() < 2) throw std::invalid_argument("full-mesh verification needs at least 2 users");
    MeshReport report;
    LinkSet links = served_links(assignment);
    for (const UserPair& p : users.all_pairs()) {
        ++report.total_links;
        if (links.covers(p))
            ++report.covered_links;
        else
            report.missing.push_back(p);
    }
    for (const User& u : users.users())
        report.channels_per_user[u.id] = assignment.channel_count(u.id);
    report.pass = report.missing.empty();
    return report;
}

}  // namespace qnet
