// Copyright 2026 The CSQM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef CSQM_PROTOCOL_H
#define CSQM_PROTOCOL_H

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "csqm/money.h"
#include "json.hpp"

namespace csqm {

using Json = nlohmann::json;

enum class Role { Bank, Receiver, Cloud };
const char *role_name(Role role);
Role parse_role(std::string_view name);

struct Address {
    Role role = Role::Bank;
    std::string id;

    std::string str() const;  // "<role>:<id>"
    static Address parse(std::string_view text);
    bool operator==(const Address &other) const = default;
};

inline constexpr std::string_view kWireVersion = "CSQM/1";

/// One framed message. The payload is canonical JSON: sorted keys, no
/// whitespace, bit strings in "<bits>:<hex>" form.
struct Envelope {
    std::string version{kWireVersion};
    uint64_t session = 0;
    uint64_t seq = 0;
    Address from;
    Address to;
    std::string kind;
    std::string payload;

    bool operator==(const Envelope &other) const = default;
};

/// "CSQM/1|session|seq|from|to|kind|<payload length>|payload"
std::string encode_envelope(const Envelope &e);
/// Rejects unknown versions, bad lengths and non-canonical payloads.
Envelope decode_envelope(std::string_view line);
std::string canonical_json(const Json &value);

/// Ordered record of every envelope on the wire plus role-local events.
/// Appends are serialized so concurrent sessions never interleave a line.
class Transcript {
   public:
    void append_envelope(const Envelope &e);
    void append_event(uint64_t session, const Address &actor, const std::string &kind, const Json &detail);

    std::vector<std::string> lines() const;
    std::vector<Envelope> envelopes() const;
    /// Lines joined with '\n', trailing newline included.
    std::string bytes() const;
    void write(const std::filesystem::path &path) const;

   private:
    mutable std::mutex mu_;
    std::vector<std::string> lines_;
};

/// Role that may send each message kind, and the role it goes to.
struct KindRule {
    Role from;
    Role to;
};
const std::map<std::string, KindRule> &message_kinds();

/// Reliable ordered in-process channel. Every envelope is encoded, passed
/// through the optional fault hook, recorded, then decoded and checked on
/// the receiving side.
class Channel {
   public:
    using FaultHook = std::function<void(Envelope &)>;

    explicit Channel(Transcript &transcript) : transcript_(transcript) {
    }
    void set_fault_hook(FaultHook hook) {
        fault_ = std::move(hook);
    }

    uint64_t open_session();
    /// Sends and delivers one message; returns the payload as the receiver
    /// decoded it.
    Json deliver(uint64_t session, const Address &from, const Address &to, const std::string &kind,
                 const Json &payload);

   private:
    Transcript &transcript_;
    FaultHook fault_;
    std::mutex mu_;
    uint64_t next_session_ = 1;
    std::map<uint64_t, uint64_t> next_seq_;
    std::map<uint64_t, uint64_t> last_delivered_;
};

// Classical signatures. The scheme sits behind an interface so another one
// can be dropped in; the shipped implementation is Ed25519 from libsodium,
// which is deterministic for a fixed key and message.
class SignatureScheme {
   public:
    virtual ~SignatureScheme() = default;
    virtual std::string name() const = 0;
    virtual std::string public_key_hex() const = 0;
    virtual std::string sign(std::string_view message) const = 0;  // hex
    /// Throws InvalidArgument on malformed key or signature encodings.
    virtual bool verify(std::string_view public_key_hex, std::string_view message,
                        std::string_view signature_hex) const = 0;
};

class Ed25519Scheme final : public SignatureScheme {
   public:
    /// Keypair from a 32-byte seed drawn from rng.
    explicit Ed25519Scheme(Rng &rng);
    std::string name() const override {
        return "ed25519";
    }
    std::string public_key_hex() const override;
    std::string sign(std::string_view message) const override;
    bool verify(std::string_view public_key_hex, std::string_view message,
                std::string_view signature_hex) const override;

   private:
    std::array<uint8_t, 32> pk_{};
    std::array<uint8_t, 64> sk_{};
};

/// Value and serial bound to a sequence of token public keys by the bank.
struct TokenCertificate {
    std::vector<std::string> pks;  // serialized PublicKey values
    uint64_t value = 0;
    BitVector serial;
    std::string signature;  // hex, over signed_bytes()

    std::string signed_bytes() const;
    Json to_json() const;
    static TokenCertificate from_json(const Json &j);
    bool operator==(const TokenCertificate &other) const = default;
};

/// Append-only value ledger and serial registry. Each line carries a
/// checksum; on load a torn final line is dropped and any other damaged line
/// is an integrity error.
class Ledger {
   public:
    Ledger() = default;
    /// Replays an existing file (if any) and appends to it from then on.
    explicit Ledger(std::filesystem::path path) {
        open(std::move(path));
    }
    void open(std::filesystem::path path);

    /// Records a fresh serial; false if it was ever registered.
    bool reserve_serial(const BitVector &serial);
    bool serial_known(const BitVector &serial) const;
    void issue(const BitVector &serial, uint64_t value);
    void transfer(const BitVector &from, const BitVector &to);
    /// Pays out and retires the serial. Returns the amount.
    uint64_t redeem(const BitVector &serial);
    void retire(const BitVector &serial);
    bool retired(const BitVector &serial) const;
    uint64_t balance(const BitVector &serial) const;

    uint64_t total_issued() const {
        return issued_;
    }
    uint64_t total_redeemed() const {
        return redeemed_;
    }
    uint64_t outstanding() const;

   private:
    void apply(const std::string &op, const std::vector<std::string> &args);
    void append(const std::string &op, const std::vector<std::string> &args);

    mutable std::mutex mu_;
    std::optional<std::filesystem::path> path_;
    std::set<std::string> serials_;
    std::set<std::string> retired_;
    std::map<std::string, uint64_t> balances_;
    uint64_t issued_ = 0;
    uint64_t redeemed_ = 0;
};

/// Public oracle directory: resolves a serialized public key to the opaque
/// membership programs published by the bank.
class OracleRegistry {
   public:
    void publish(const PublicKey &pk);
    /// Throws Protocol on an unknown key.
    PublicKey resolve(const std::string &serialized) const;

   private:
    mutable std::mutex mu_;
    std::map<std::string, PublicKey> keys_;
};

struct Bank {
    Address addr;
    Rng rng;
    std::unique_ptr<SignatureScheme> signer;
    std::map<uint64_t, BankTokenSecrets> secrets;  // minted, non-aborted
    std::map<std::string, uint64_t> pk_owner;      // serialized pk -> token id
};

/// A token sequence with its certificate, as held by a receiver.
struct Wallet {
    TokenCertificate cert;
    std::vector<uint64_t> tokens;
    std::string cloud;  // id of the cloud holding the registers
    bool spent = false;
};

struct Receiver {
    Address addr;
    Rng rng;
    std::map<uint64_t, ReceiverTokenKeys> keys;
    std::map<uint64_t, std::string> pks;  // token id -> serialized pk
    std::optional<Wallet> wallet;
};

struct Cloud {
    Address addr;
    Rng rng;
    Backend backend = Backend::Semantic;
    size_t gadget_width = kDefaultGadgetWidth;
    std::map<uint64_t, TokenRegisters> tokens;
};

struct SeedTuple {
    uint64_t bank = 1;
    uint64_t rec = 2;
    uint64_t cloud = 3;
};

/// Shared infrastructure of one simulation: the FHE scheme, the public
/// oracle directory, the wire and the value ledger.
class World {
   public:
    explicit World(SeedTuple seeds, std::optional<std::filesystem::path> ledger_path = std::nullopt);

    Bank make_bank(const std::string &id);
    Receiver make_receiver(const std::string &id);
    Cloud make_cloud(const std::string &id, Backend backend, size_t gadget_width);

    FheContext fhe;
    OracleRegistry oracles;
    Transcript transcript;
    Channel channel{transcript};
    Ledger ledger;
    std::string bank_verify_key;  // set by make_bank
    uint64_t next_token_id = 1;

    const SeedTuple &seeds() const {
        return seeds_;
    }

   private:
    SeedTuple seeds_;
};

struct MintSessionResult {
    uint64_t token_id = 0;
    bool aborted = false;
    std::string pk;  // empty when aborted
};

MintSessionResult run_mint_session(World &world, Bank &bank, Receiver &rec, Cloud &cloud, size_t lambda,
                                   const MintFixtures &fixtures = {});

VerifyReport run_verify_session(World &world, Receiver &rec, Cloud &cloud, uint64_t token_id);

SignReport run_sign_session(World &world, Receiver &rec, Cloud &cloud, uint64_t token_id, bool b);

/// Mints until `count` tokens succeed. Gives up with Liveness after
/// 64 * count attempts.
std::vector<uint64_t> mint_tokens(World &world, Bank &bank, Receiver &rec, Cloud &cloud, size_t lambda,
                                  size_t count);

TokenCertificate bank_issue_certificate(World &world, Bank &bank, const std::vector<std::string> &pks,
                                        uint64_t value);
bool verify_certificate(const World &world, const TokenCertificate &cert);

/// Receiver-side check of a signature sequence against a certificate and a
/// serial. Returns the first failing index, or nullopt when all pass. A bad
/// certificate reports index cert.pks.size().
std::optional<size_t> check_transfer(const World &world, const TokenCertificate &cert,
                                     const std::vector<BitVector> &sigmas, const BitVector &serial);

struct TransferOptions {
    /// Sign this index with the opposite bit, which yields a string that is
    /// a valid signature for the wrong half.
    std::optional<size_t> forge_index;
};

struct TransferResult {
    bool accepted = false;
    std::optional<size_t> first_failure;
    std::vector<BitVector> sigmas;
};

/// A holds a valued wallet in cloud_a; B holds a dummy wallet whose serial
/// names the ledger slot that receives the value.
TransferResult run_transfer(World &world, Receiver &a, Cloud &cloud_a, Receiver &b,
                            const TransferOptions &options = {});

struct RedeemResult {
    bool accepted = false;
    uint64_t payout = 0;
    std::string reason;
};

/// The holder signs its own tokens against a serial chosen by the bank; the
/// bank checks the public oracles and its own coset records, then retires
/// the certificate serial and pays out its ledger balance.
RedeemResult redeem(World &world, Receiver &holder, Cloud &cloud, Bank &bank, const TransferOptions &options = {});

/// Role-isolation scan. Private values are matched in their wire encodings
/// (bit string and hex) when at least kMinScannedBits long; matrices are
/// also matched in their formatted forms. Payload field names are checked
/// against a deny-list. Returns one line per finding.
inline constexpr size_t kMinScannedBits = 16;

struct PrivateValue {
    std::string label;
    std::vector<std::string> forms;
};

std::vector<PrivateValue> private_values(const Bank &bank, const std::vector<const Receiver *> &receivers);
const std::set<std::string> &denied_field_names();
std::vector<std::string> scan_transcript(const Transcript &transcript, const std::vector<PrivateValue> &values);

}  // namespace csqm

#endif
