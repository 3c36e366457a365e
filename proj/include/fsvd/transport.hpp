#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/message.hpp"

namespace fsvd {

// Exact communication accounting. Floats are counted per delivered payload
// value: a broadcast to S clients books its payload S times. The byte figure
// follows the 4-bytes-per-float reporting convention; the wire itself moves
// float64, which bytes_on_wire reflects.
struct TransmissionLedger {
    std::uint64_t floats_client_to_agg = 0;
    std::uint64_t floats_agg_to_clients = 0;
    std::uint64_t messages_client_to_agg = 0;
    std::uint64_t messages_agg_to_clients = 0;
    std::uint64_t rounds = 0;

    std::uint64_t floats_total() const { return floats_client_to_agg + floats_agg_to_clients; }
    std::uint64_t messages() const { return messages_client_to_agg + messages_agg_to_clients; }
    std::uint64_t bytes() const { return 4 * floats_total(); }
    std::uint64_t bytes_on_wire() const { return 8 * floats_total(); }
};

// One logical entry per client upload and per aggregator broadcast.
struct TranscriptEntry {
    Message message;
    bool to_aggregator = false;
};

struct Transcript {
    std::vector<TranscriptEntry> entries;
};

// Synchronous star-topology channel: clients upload, the aggregator collects
// everything at a round barrier, replies with one broadcast. Implementations
// must be deterministic; collected messages always arrive in ascending
// site-id order.
class Transport {
public:
    virtual ~Transport() = default;

    virtual void send_to_aggregator(const Message& m) = 0;
    virtual std::vector<Message> collect_from_clients(std::size_t expected) = 0;
    virtual void broadcast(const Message& m) = 0;
    virtual Message receive_broadcast(std::uint32_t site) = 0;

    virtual std::size_t sites() const = 0;
    virtual const TransmissionLedger& ledger() const = 0;
};

// In-process implementation used by the simulator and every test. A round is
// one collect/broadcast cycle; the transport stamps each message with the
// number of completed rounds so transcripts carry a usable timeline.
class LoopbackTransport final : public Transport {
public:
    explicit LoopbackTransport(std::size_t sites, Transcript* transcript = nullptr)
        : sites_(sites), transcript_(transcript), pending_broadcast_(sites) {
        if (sites == 0) throw TransportError("transport needs at least one site");
    }

    void send_to_aggregator(const Message& m) override {
        ensure_open();
        if (m.sender >= sites_)
            throw TransportError("send_to_aggregator: unknown site " + std::to_string(m.sender));
        Message stamped = m;
        stamped.round = ledger_.rounds;
        ledger_.floats_client_to_agg += stamped.float_count();
        ledger_.messages_client_to_agg += 1;
        if (transcript_) transcript_->entries.push_back({stamped, true});
        inbox_.push_back(std::move(stamped));
    }

    std::vector<Message> collect_from_clients(std::size_t expected) override {
        ensure_open();
        if (inbox_.size() != expected)
            throw TransportError("round barrier: expected " + std::to_string(expected) +
                                 " uploads, have " + std::to_string(inbox_.size()));
        std::vector<Message> out;
        out.swap(inbox_);
        std::stable_sort(out.begin(), out.end(),
                         [](const Message& a, const Message& b) { return a.sender < b.sender; });
        return out;
    }

    void broadcast(const Message& m) override {
        ensure_open();
        if (!inbox_.empty())
            throw TransportError("broadcast with uncollected uploads in flight");
        Message stamped = m;
        stamped.sender = kAggregatorId;
        stamped.round = ledger_.rounds;
        ledger_.floats_agg_to_clients += stamped.float_count() * sites_;
        ledger_.messages_agg_to_clients += sites_;
        ledger_.rounds += 1;
        if (transcript_) transcript_->entries.push_back({stamped, false});
        for (auto& slot : pending_broadcast_) {
            if (slot.has_value())
                throw TransportError("broadcast while a previous one is undelivered");
            slot = stamped;
        }
    }

    Message receive_broadcast(std::uint32_t site) override {
        ensure_open();
        if (site >= sites_)
            throw TransportError("receive_broadcast: unknown site " + std::to_string(site));
        if (!pending_broadcast_[site].has_value())
            throw TransportError("receive_broadcast: nothing pending for site " +
                                 std::to_string(site));
        Message m = std::move(*pending_broadcast_[site]);
        pending_broadcast_[site].reset();
        return m;
    }

    std::size_t sites() const override { return sites_; }
    const TransmissionLedger& ledger() const override { return ledger_; }

    void close() { open_ = false; }

private:
    void ensure_open() const {
        if (!open_) throw TransportError("transport is closed");
    }

    std::size_t sites_;
    Transcript* transcript_;
    bool open_ = true;
    TransmissionLedger ledger_;
    std::vector<Message> inbox_;
    std::vector<std::optional<Message>> pending_broadcast_;
};

// ---------------------------------------------------------------------------
// Transcript scanner: the enforcement half of the privacy contract. Verifies
// that every recorded message has exactly the shape its kind allows given
// the run geometry, and that no payload dimension coincides with the global
// or any per-site sample count. Returns human-readable violations; an empty
// result means the transcript is clean.
// ---------------------------------------------------------------------------

struct ScanContext {
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t c = 2;
    std::size_t i_prime = 10;
    std::vector<std::size_t> site_samples;
};

inline std::vector<std::string> scan_transcript(const Transcript& t, const ScanContext& ctx) {
    std::vector<std::string> violations;
    std::size_t total_samples = 0;
    for (std::size_t n : ctx.site_samples) total_samples += n;

    auto flag = [&](const Message& m, const std::string& why) {
        violations.push_back(std::string(kind_name(m.kind)) + " from " +
                             (m.sender == kAggregatorId ? "aggregator"
                                                        : "site " + std::to_string(m.sender)) +
                             " round " + std::to_string(m.round) + ": " + why + " (" +
                             std::to_string(m.payload.rows()) + "x" +
                             std::to_string(m.payload.cols()) + ")");
    };

    for (const auto& entry : t.entries) {
        const Message& msg = entry.message;
        const std::size_t rows = msg.payload.rows();
        const std::size_t cols = msg.payload.cols();
        bool shape_ok = false;
        switch (msg.kind) {
            case MessageKind::PartialH:
            case MessageKind::GlobalH:
                shape_ok = rows == ctx.m && cols == ctx.k;
                break;
            case MessageKind::PartialNorm:
            case MessageKind::GlobalNorm:
                shape_ok = rows == 1 && cols == 1;
                break;
            case MessageKind::PartialResiduals:
            case MessageKind::GlobalResiduals:
                shape_ok = cols == 1 && rows >= 1 && rows < ctx.k;
                break;
            case MessageKind::LocalSubspace:
                shape_ok = rows == ctx.c * ctx.k && cols == ctx.m;
                break;
            case MessageKind::ProxyCov:
                shape_ok = rows == ctx.k * ctx.i_prime && cols == rows;
                break;
            case MessageKind::ProxyEigvecs:
                shape_ok = rows == ctx.k * ctx.i_prime && cols == ctx.k;
                break;
            case MessageKind::Terminate:
                shape_ok = rows == 0 && cols == 0;
                break;
        }
        if (!shape_ok) flag(msg, "shape outside the kind's contract");
        for (std::size_t dim : {rows, cols}) {
            if (dim == 0) continue;
            if (dim == total_samples) {
                flag(msg, "dimension equals the global sample count");
            } else if (std::find(ctx.site_samples.begin(), ctx.site_samples.end(), dim) !=
                       ctx.site_samples.end()) {
                flag(msg, "dimension equals a per-site sample count");
            }
        }
    }
    return violations;
}

}  // namespace fsvd
