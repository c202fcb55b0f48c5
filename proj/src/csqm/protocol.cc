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


#include "csqm/protocol.h"

#include <sodium.h>
#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "csqm/errors.h"

namespace csqm {

namespace {

std::string bytes_hex(const uint8_t *data, size_t n) {
    std::string out(2 * n + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data, n);
    out.pop_back();
    return out;
}

template <size_t N>
std::array<uint8_t, N> hex_bytes(std::string_view hex, const char *what) {
    std::array<uint8_t, N> out{};
    size_t len = 0;
    const char *end = nullptr;
    int rc = sodium_hex2bin(out.data(), N, hex.data(), hex.size(), nullptr, &len, &end);
    if (rc != 0 || len != N || end != hex.data() + hex.size()) {
        fail(ErrorCode::InvalidArgument, std::string("malformed ") + what);
    }
    return out;
}

void init_sodium() {
    require(sodium_init() >= 0, ErrorCode::Internal, "libsodium failed to initialize");
}

uint64_t parse_u64(std::string_view text, const char *what) {
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        fail(ErrorCode::Integrity, std::string("bad ") + what + " field");
    }
    return v;
}

std::vector<std::string_view> split_fields(std::string_view line, size_t count) {
    std::vector<std::string_view> out;
    size_t pos = 0;
    for (size_t i = 0; i + 1 < count; i++) {
        size_t bar = line.find('|', pos);
        require(bar != std::string_view::npos, ErrorCode::Integrity, "truncated envelope");
        out.push_back(line.substr(pos, bar - pos));
        pos = bar + 1;
    }
    out.push_back(line.substr(pos));
    return out;
}

std::string key_id_hex(KeyId id) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(id));
    return buf;
}

OracleKind parse_oracle(const std::string &name) {
    for (OracleKind k : {OracleKind::Primal0, OracleKind::Primal1, OracleKind::Primal, OracleKind::Dual}) {
        if (name == oracle_kind_name(k)) {
            return k;
        }
    }
    fail(ErrorCode::Protocol, "unknown oracle '" + name + "'");
}

template <typename Map>
auto &lookup(Map &m, uint64_t token, const char *what) {
    auto it = m.find(token);
    if (it == m.end()) {
        fail(ErrorCode::Protocol, std::string(what) + " has no record of token " + std::to_string(token));
    }
    return it->second;
}

}  // namespace

const char *role_name(Role role) {
    switch (role) {
        case Role::Bank:
            return "bank";
        case Role::Receiver:
            return "rec";
        case Role::Cloud:
            return "cloud";
    }
    return "?";
}

Role parse_role(std::string_view name) {
    for (Role r : {Role::Bank, Role::Receiver, Role::Cloud}) {
        if (name == role_name(r)) {
            return r;
        }
    }
    fail(ErrorCode::Integrity, "unknown role '" + std::string(name) + "'");
}

std::string Address::str() const {
    return std::string(role_name(role)) + ":" + id;
}

Address Address::parse(std::string_view text) {
    size_t colon = text.find(':');
    require(colon != std::string_view::npos, ErrorCode::Integrity, "address lacks a role");
    return Address{parse_role(text.substr(0, colon)), std::string(text.substr(colon + 1))};
}

std::string canonical_json(const Json &value) {
    // nlohmann objects are ordered maps, so dump() already sorts keys.
    return value.dump();
}

std::string encode_envelope(const Envelope &e) {
    std::string out = e.version;
    out += '|' + std::to_string(e.session) + '|' + std::to_string(e.seq) + '|' + e.from.str() + '|' + e.to.str() +
           '|' + e.kind + '|' + std::to_string(e.payload.size()) + '|' + e.payload;
    return out;
}

Envelope decode_envelope(std::string_view line) {
    auto f = split_fields(line, 8);
    Envelope e;
    if (f[0] != kWireVersion) {
        fail(ErrorCode::Protocol, "unsupported wire version '" + std::string(f[0]) + "'");
    }
    e.version = std::string(f[0]);
    e.session = parse_u64(f[1], "session");
    e.seq = parse_u64(f[2], "sequence");
    e.from = Address::parse(f[3]);
    e.to = Address::parse(f[4]);
    e.kind = std::string(f[5]);
    require(parse_u64(f[6], "length") == f[7].size(), ErrorCode::Integrity, "payload length mismatch");
    e.payload = std::string(f[7]);
    Json parsed = Json::parse(e.payload, nullptr, false);
    require(!parsed.is_discarded() && canonical_json(parsed) == e.payload, ErrorCode::Integrity,
            "payload is not canonical JSON");
    return e;
}

void Transcript::append_envelope(const Envelope &e) {
    std::string line = encode_envelope(e);
    std::lock_guard lock(mu_);
    lines_.push_back(std::move(line));
}

void Transcript::append_event(uint64_t session, const Address &actor, const std::string &kind, const Json &detail) {
    std::string body = canonical_json(detail);
    std::string line = "EVENT|" + std::to_string(session) + '|' + actor.str() + '|' + kind + '|' +
                       std::to_string(body.size()) + '|' + body;
    std::lock_guard lock(mu_);
    lines_.push_back(std::move(line));
}

std::vector<std::string> Transcript::lines() const {
    std::lock_guard lock(mu_);
    return lines_;
}

std::vector<Envelope> Transcript::envelopes() const {
    std::vector<Envelope> out;
    for (const auto &line : lines()) {
        if (line.rfind("EVENT|", 0) != 0) {
            out.push_back(decode_envelope(line));
        }
    }
    return out;
}

std::string Transcript::bytes() const {
    std::string out;
    for (const auto &line : lines()) {
        out += line;
        out += '\n';
    }
    return out;
}

void Transcript::write(const std::filesystem::path &path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), ErrorCode::InvalidArgument, "cannot open transcript file for writing");
    f << bytes();
    require(f.good(), ErrorCode::Internal, "transcript write failed");
}

const std::map<std::string, KindRule> &message_kinds() {
    static const std::map<std::string, KindRule> kinds = {
        {"mint.offer", {Role::Bank, Role::Receiver}},
        {"mint.request", {Role::Receiver, Role::Cloud}},
        {"mint.result", {Role::Cloud, Role::Receiver}},
        {"mint.pads", {Role::Receiver, Role::Bank}},
        {"mint.pk", {Role::Bank, Role::Receiver}},
        {"mint.abort", {Role::Bank, Role::Receiver}},
        {"token.release", {Role::Receiver, Role::Cloud}},
        {"oracle.request", {Role::Receiver, Role::Cloud}},
        {"oracle.response", {Role::Cloud, Role::Receiver}},
        {"sign.measure", {Role::Receiver, Role::Cloud}},
        {"sign.result", {Role::Cloud, Role::Receiver}},
        {"cert.issue", {Role::Bank, Role::Receiver}},
        {"transfer.serial", {Role::Receiver, Role::Receiver}},
        {"transfer.signatures", {Role::Receiver, Role::Receiver}},
        {"redeem.request", {Role::Receiver, Role::Bank}},
        {"redeem.challenge", {Role::Bank, Role::Receiver}},
        {"redeem.signatures", {Role::Receiver, Role::Bank}},
        {"redeem.result", {Role::Bank, Role::Receiver}},
    };
    return kinds;
}

uint64_t Channel::open_session() {
    std::lock_guard lock(mu_);
    return next_session_++;
}

Json Channel::deliver(uint64_t session, const Address &from, const Address &to, const std::string &kind,
                      const Json &payload) {
    const auto &kinds = message_kinds();
    auto rule = kinds.find(kind);
    require(rule != kinds.end(), ErrorCode::Protocol, "unknown message kind");
    if (rule->second.from != from.role || rule->second.to != to.role) {
        fail(ErrorCode::Protocol, from.str() + " may not send " + kind + " to " + to.str());
    }
    std::lock_guard lock(mu_);
    Envelope e;
    e.session = session;
    e.seq = ++next_seq_[session];
    e.from = from;
    e.to = to;
    e.kind = kind;
    e.payload = canonical_json(payload);
    if (fault_) {
        fault_(e);
    }
    transcript_.append_envelope(e);

    // Receiving side sees only the wire bytes.
    Envelope got = decode_envelope(encode_envelope(e));
    if (got.seq <= last_delivered_[got.session] || got.session != session) {
        fail(ErrorCode::Ordering, "envelope " + std::to_string(got.seq) + " of session " +
                                      std::to_string(got.session) + " is out of order");
    }
    auto got_rule = kinds.find(got.kind);
    if (got_rule == kinds.end() || got_rule->second.from != got.from.role || got.to != to) {
        fail(ErrorCode::Protocol, "envelope kind or routing changed in transit");
    }
    last_delivered_[got.session] = got.seq;
    return Json::parse(got.payload);
}

Ed25519Scheme::Ed25519Scheme(Rng &rng) {
    init_sodium();
    std::array<uint8_t, 32> seed{};
    for (size_t i = 0; i < 4; i++) {
        uint64_t w = rng.next_u64();
        for (size_t b = 0; b < 8; b++) {
            seed[8 * i + b] = static_cast<uint8_t>(w >> (8 * b));
        }
    }
    crypto_sign_seed_keypair(pk_.data(), sk_.data(), seed.data());
    sodium_memzero(seed.data(), seed.size());
}

std::string Ed25519Scheme::public_key_hex() const {
    return bytes_hex(pk_.data(), pk_.size());
}

std::string Ed25519Scheme::sign(std::string_view message) const {
    std::array<uint8_t, crypto_sign_BYTES> sig{};
    crypto_sign_detached(sig.data(), nullptr, reinterpret_cast<const uint8_t *>(message.data()), message.size(),
                         sk_.data());
    return bytes_hex(sig.data(), sig.size());
}

bool Ed25519Scheme::verify(std::string_view public_key_hex, std::string_view message,
                           std::string_view signature_hex) const {
    auto pk = hex_bytes<crypto_sign_PUBLICKEYBYTES>(public_key_hex, "public key");
    auto sig = hex_bytes<crypto_sign_BYTES>(signature_hex, "signature");
    return crypto_sign_verify_detached(sig.data(), reinterpret_cast<const uint8_t *>(message.data()),
                                       message.size(), pk.data()) == 0;
}

std::string TokenCertificate::signed_bytes() const {
    Json j;
    j["pks"] = pks;
    j["serial"] = serial.hex();
    j["value"] = value;
    return "CSQM-CERT/1\n" + canonical_json(j);
}

Json TokenCertificate::to_json() const {
    Json j;
    j["pks"] = pks;
    j["serial"] = serial.hex();
    j["value"] = value;
    j["signature"] = signature;
    return j;
}

TokenCertificate TokenCertificate::from_json(const Json &j) {
    try {
        TokenCertificate c;
        c.pks = j.at("pks").get<std::vector<std::string>>();
        c.value = j.at("value").get<uint64_t>();
        c.serial = BitVector::from_hex(j.at("serial").get<std::string>());
        c.signature = j.at("signature").get<std::string>();
        return c;
    } catch (const Json::exception &) {
        fail(ErrorCode::Integrity, "malformed certificate");
    }
}

// Ledger ---------------------------------------------------------------------

namespace {

std::string line_checksum(const std::string &body) {
    uint8_t out[8];
    crypto_generichash(out, sizeof(out), reinterpret_cast<const uint8_t *>(body.data()), body.size(), nullptr, 0);
    return bytes_hex(out, sizeof(out));
}

std::vector<std::string> split_words(const std::string &s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) {
        out.push_back(w);
    }
    return out;
}

}  // namespace

void Ledger::open(std::filesystem::path path) {
    std::lock_guard lock(mu_);
    path_ = std::move(path);
    init_sodium();
    std::ifstream f(*path_, std::ios::binary);
    if (!f) {
        return;
    }
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    f.close();
    size_t pos = 0, good_end = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            break;  // torn final line from an interrupted append
        }
        std::string line = text.substr(pos, nl - pos);
        size_t sp = line.rfind(' ');
        require(sp != std::string::npos && line_checksum(line.substr(0, sp)) == line.substr(sp + 1),
                ErrorCode::Integrity, "ledger line fails its checksum");
        auto words = split_words(line.substr(0, sp));
        require(!words.empty(), ErrorCode::Integrity, "empty ledger record");
        apply(words[0], std::vector<std::string>(words.begin() + 1, words.end()));
        pos = good_end = nl + 1;
    }
    if (good_end != text.size()) {
        std::filesystem::resize_file(*path_, good_end);
    }
}

void Ledger::apply(const std::string &op, const std::vector<std::string> &a) {
    auto need = [&](size_t n) { require(a.size() == n, ErrorCode::Integrity, "ledger record has wrong arity"); };
    if (op == "SERIAL") {
        need(1);
        serials_.insert(a[0]);
    } else if (op == "ISSUE") {
        need(2);
        uint64_t v = std::stoull(a[1]);
        balances_[a[0]] += v;
        issued_ += v;
    } else if (op == "TRANSFER") {
        need(2);
        balances_[a[1]] += balances_[a[0]];
        balances_[a[0]] = 0;
        retired_.insert(a[0]);
    } else if (op == "REDEEM") {
        need(2);
        uint64_t v = std::stoull(a[1]);
        balances_[a[0]] -= v;
        redeemed_ += v;
        retired_.insert(a[0]);
    } else if (op == "RETIRE") {
        need(1);
        retired_.insert(a[0]);
    } else {
        fail(ErrorCode::Integrity, "unknown ledger record '" + op + "'");
    }
}

void Ledger::append(const std::string &op, const std::vector<std::string> &args) {
    std::string body = op;
    for (const auto &a : args) {
        body += ' ' + a;
    }
    if (path_) {
        std::string line = body + ' ' + line_checksum(body) + '\n';
        FILE *f = std::fopen(path_->c_str(), "ab");
        require(f != nullptr, ErrorCode::Internal, "cannot open ledger file");
        bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fflush(f) == 0 &&
                  ::fsync(fileno(f)) == 0;
        std::fclose(f);
        require(ok, ErrorCode::Internal, "ledger append failed");
    }
    apply(op, args);
}

bool Ledger::reserve_serial(const BitVector &serial) {
    std::lock_guard lock(mu_);
    if (serials_.count(serial.hex())) {
        return false;
    }
    append("SERIAL", {serial.hex()});
    return true;
}

bool Ledger::serial_known(const BitVector &serial) const {
    std::lock_guard lock(mu_);
    return serials_.count(serial.hex()) > 0;
}

void Ledger::issue(const BitVector &serial, uint64_t value) {
    std::lock_guard lock(mu_);
    require(serials_.count(serial.hex()) && !retired_.count(serial.hex()), ErrorCode::Protocol,
            "value issued against an unknown or retired serial");
    append("ISSUE", {serial.hex(), std::to_string(value)});
}

void Ledger::transfer(const BitVector &from, const BitVector &to) {
    std::lock_guard lock(mu_);
    require(!retired_.count(from.hex()) && !retired_.count(to.hex()), ErrorCode::Protocol,
            "transfer touches a retired serial");
    append("TRANSFER", {from.hex(), to.hex()});
}

uint64_t Ledger::redeem(const BitVector &serial) {
    std::lock_guard lock(mu_);
    require(!retired_.count(serial.hex()), ErrorCode::Protocol, "serial already retired");
    uint64_t v = balances_[serial.hex()];
    append("REDEEM", {serial.hex(), std::to_string(v)});
    return v;
}

void Ledger::retire(const BitVector &serial) {
    std::lock_guard lock(mu_);
    append("RETIRE", {serial.hex()});
}

bool Ledger::retired(const BitVector &serial) const {
    std::lock_guard lock(mu_);
    return retired_.count(serial.hex()) > 0;
}

uint64_t Ledger::balance(const BitVector &serial) const {
    std::lock_guard lock(mu_);
    auto it = balances_.find(serial.hex());
    return it == balances_.end() ? 0 : it->second;
}

uint64_t Ledger::outstanding() const {
    std::lock_guard lock(mu_);
    uint64_t total = 0;
    for (const auto &[serial, v] : balances_) {
        if (!retired_.count(serial)) {
            total += v;
        }
    }
    return total;
}

void OracleRegistry::publish(const PublicKey &pk) {
    std::lock_guard lock(mu_);
    keys_[pk.serialize()] = pk;
}

PublicKey OracleRegistry::resolve(const std::string &serialized) const {
    std::lock_guard lock(mu_);
    auto it = keys_.find(serialized);
    require(it != keys_.end(), ErrorCode::Protocol, "public key was never published");
    return it->second;
}

World::World(SeedTuple seeds, std::optional<std::filesystem::path> ledger_path) : seeds_(seeds) {
    if (ledger_path) {
        ledger.open(*ledger_path);
    }
}

Bank World::make_bank(const std::string &id) {
    Bank b;
    b.addr = {Role::Bank, id};
    b.rng = Rng::stream(seeds_.bank, b.addr.str());
    b.signer = std::make_unique<Ed25519Scheme>(b.rng);
    bank_verify_key = b.signer->public_key_hex();
    return b;
}

Receiver World::make_receiver(const std::string &id) {
    Receiver r;
    r.addr = {Role::Receiver, id};
    r.rng = Rng::stream(seeds_.rec, r.addr.str());
    return r;
}

Cloud World::make_cloud(const std::string &id, Backend backend, size_t gadget_width) {
    Cloud c;
    c.addr = {Role::Cloud, id};
    c.rng = Rng::stream(seeds_.cloud, c.addr.str());
    c.backend = backend;
    c.gadget_width = gadget_width;
    return c;
}

// Sessions -------------------------------------------------------------------

MintSessionResult run_mint_session(World &world, Bank &bank, Receiver &rec, Cloud &cloud, size_t lambda,
                                   const MintFixtures &fixtures) {
    check_lambda(lambda);
    require(lambda <= kMaxMintLambda, ErrorCode::Capacity, "lambda too large for the mint circuit");
    require(cloud.backend != Backend::Gadget || lambda <= kMaxGadgetLambda, ErrorCode::Capacity,
            "the gadget backend is limited to lambda <= 8");
    Channel &ch = world.channel;
    const uint64_t session = ch.open_session();
    const size_t half = lambda / 2;
    MintSessionResult result;

    // Bank: sample the subspace and the matrix pad, seal the pad.
    const uint64_t token = world.next_token_id++;
    BitMatrix ms = fixtures.ms ? *fixtures.ms : sample_full_rank(half, lambda, bank.rng);
    BitMatrix px = fixtures.px ? *fixtures.px : BitMatrix::random(half + 1, lambda, bank.rng);
    require(ms.rows() == half && ms.cols() == lambda && rank(ms) == half, ErrorCode::InvalidArgument,
            "M_S must be a full-rank lambda/2 x lambda matrix");
    require(px.rows() == half + 1 && px.cols() == lambda, ErrorCode::InvalidArgument,
            "p_x must be (lambda/2 + 1) x lambda");
    FheKey fhek = world.fhe.keygen(lambda, mint_level_budget(lambda), bank.rng);
    Json offer;
    offer["token"] = token;
    offer["lambda"] = lambda;
    offer["matrix"] = (affine_rows(ms) ^ px).str_hex();
    offer["ct"] = world.fhe.serialize(world.fhe.enc(fhek, flatten(px)));
    offer["eval_key"] = {{"id", key_id_hex(fhek.id)}, {"levels", fhek.level_budget}};
    Json got = ch.deliver(session, bank.addr, rec.addr, "mint.offer", offer);

    // Receiver: shift every row by R and forward.
    BitMatrix padded = BitMatrix::from_hex(got.at("matrix").get<std::string>());
    BitVector r = fixtures.r ? *fixtures.r : BitVector::random(lambda, rec.rng);
    require(r.size() == lambda, ErrorCode::InvalidArgument, "R must have lambda bits");
    Json request = got;
    request["matrix"] = xor_shift_rows(padded, r).str_hex();
    got = ch.deliver(session, rec.addr, cloud.addr, "mint.request", request);

    // Cloud: run the expansion circuit and disentangle the index register.
    {
        const size_t n = got.at("lambda").get<size_t>();
        BitMatrix shifted = BitMatrix::from_hex(got.at("matrix").get<std::string>());
        SealedCiphertext ct_px = world.fhe.parse(got.at("ct").get<std::string>());
        FheKey key{ct_px.key_id(), n, got.at("eval_key").at("levels").get<size_t>()};
        require(key_id_hex(key.id) == got.at("eval_key").at("id").get<std::string>(), ErrorCode::Protocol,
                "evaluation key does not match the ciphertext");
        CloudMintState state = execute_mint_circuit(build_mint_circuit(n), shifted, ct_px, key, cloud.backend,
                                                    cloud.gadget_width, cloud.rng);
        const uint64_t id = got.at("token").get<uint64_t>();
        DisentangleResult dis = disentangle_index(std::move(state), id, cloud.rng);
        cloud.tokens[id] = std::move(dis.token);
        Json out;
        out["token"] = id;
        out["ct"] = world.fhe.serialize(dis.ct_xz);
        got = ch.deliver(session, cloud.addr, rec.addr, "mint.result", out);
    }

    // Receiver: pass the pad ciphertext on to the bank.
    got = ch.deliver(session, rec.addr, bank.addr, "mint.pads", got);

    // Bank: decrypt, correct for the index outcome, and decide.
    FinalizeOutcome fin = bank_finalize(token, ms, px, fhek.id,
                                        world.fhe.dec(fhek, world.fhe.parse(got.at("ct").get<std::string>())));
    world.transcript.append_event(session, bank.addr, "finalize", {{"token", token}, {"aborted", fin.aborted}});
    result.token_id = token;
    if (fin.aborted) {
        result.aborted = true;
        ch.deliver(session, bank.addr, rec.addr, "mint.abort", {{"token", token}});
        ch.deliver(session, rec.addr, cloud.addr, "token.release", {{"token", token}});
        cloud.tokens.erase(token);
        return result;
    }
    PublicKey pk(fin.oracles, token, lambda);
    world.oracles.publish(pk);
    bank.pk_owner[pk.serialize()] = token;
    bank.secrets[token] = std::move(fin.secrets);
    got = ch.deliver(session, bank.addr, rec.addr, "mint.pk", {{"token", token}, {"pk", pk.serialize()}});

    result.pk = got.at("pk").get<std::string>();
    rec.keys[token] = initial_receiver_keys(r);
    rec.pks[token] = result.pk;
    return result;
}

namespace {

// One oracle test between a receiver and its cloud under a fresh reckey.
bool oracle_session_round(World &world, uint64_t session, Receiver &rec, Cloud &cloud, uint64_t token,
                          OracleKind kind) {
    Channel &ch = world.channel;
    ReceiverTokenKeys &keys = lookup(rec.keys, token, "receiver");
    const size_t lambda = keys.r.size();
    FheKey reckey = world.fhe.keygen(lambda, kReceiverLevelBudget, rec.rng);
    Json req;
    req["token"] = token;
    req["pk"] = lookup(rec.pks, token, "receiver");
    req["oracle"] = oracle_kind_name(kind);
    req["ct"] = world.fhe.serialize(world.fhe.enc(reckey, pad_to_bits(keys.pads)));
    req["levels"] = reckey.level_budget;
    Json got = ch.deliver(session, rec.addr, cloud.addr, "oracle.request", req);

    {
        const uint64_t id = got.at("token").get<uint64_t>();
        TokenRegisters &regs = lookup(cloud.tokens, id, "cloud");
        PublicKey pk = world.oracles.resolve(got.at("pk").get<std::string>());
        SealedCiphertext ct = world.fhe.parse(got.at("ct").get<std::string>());
        FheKey key{ct.key_id(), regs.lambda, got.at("levels").get<size_t>()};
        bool mu = cloud_oracle_round(regs, pk, parse_oracle(got.at("oracle").get<std::string>()), ct, key,
                                     cloud.rng);
        got = ch.deliver(session, cloud.addr, rec.addr, "oracle.response",
                         {{"token", id}, {"mu", mu}, {"ct", world.fhe.serialize(ct)}});
    }

    SealedCiphertext ct = world.fhe.parse(got.at("ct").get<std::string>());
    return receiver_open_round(keys, world.fhe, reckey, ct, got.at("mu").get<bool>());
}

BitVector measure_round(World &world, uint64_t session, Receiver &rec, Cloud &cloud, uint64_t token) {
    Channel &ch = world.channel;
    Json got = ch.deliver(session, rec.addr, cloud.addr, "sign.measure", {{"token", token}});
    {
        const uint64_t id = got.at("token").get<uint64_t>();
        BitVector masked = cloud_measure_data(lookup(cloud.tokens, id, "cloud"), cloud.rng);
        got = ch.deliver(session, cloud.addr, rec.addr, "sign.result", {{"token", id}, {"sigma", masked.hex()}});
    }
    const ReceiverTokenKeys &keys = lookup(rec.keys, token, "receiver");
    BitVector masked = BitVector::from_hex(got.at("sigma").get<std::string>());
    require(masked.size() == keys.r.size(), ErrorCode::Protocol, "signature has the wrong length");
    return masked ^ keys.pads.x.slice(0, masked.size());
}

}  // namespace

VerifyReport run_verify_session(World &world, Receiver &rec, Cloud &cloud, uint64_t token_id) {
    const uint64_t session = world.channel.open_session();
    VerifyReport r;
    r.primal = oracle_session_round(world, session, rec, cloud, token_id, OracleKind::Primal);
    r.dual = oracle_session_round(world, session, rec, cloud, token_id, OracleKind::Dual);
    world.transcript.append_event(session, rec.addr, "verify",
                                  {{"token", token_id}, {"primal", r.primal}, {"dual", r.dual}});
    return r;
}

SignReport run_sign_session(World &world, Receiver &rec, Cloud &cloud, uint64_t token_id, bool b) {
    const uint64_t session = world.channel.open_session();
    SignReport out;
    auto finish = [&] {
        world.transcript.append_event(session, rec.addr, "sign",
                                      {{"token", token_id}, {"bit", b}, {"attempts", out.attempts}});
        return out;
    };
    auto regs = cloud.tokens.find(token_id);
    if (regs != cloud.tokens.end() && regs->second.consumed) {
        // The register already collapsed; the cloud can only read it again.
        out.sigma = measure_round(world, session, rec, cloud, token_id);
        return finish();
    }
    OracleKind half = b ? OracleKind::Primal1 : OracleKind::Primal0;
    for (size_t attempt = 1; attempt <= kMaxSignAttempts; attempt++) {
        if (oracle_session_round(world, session, rec, cloud, token_id, half)) {
            out.sigma = measure_round(world, session, rec, cloud, token_id);
            out.attempts = attempt;
            return finish();
        }
        oracle_session_round(world, session, rec, cloud, token_id, OracleKind::Dual);
    }
    fail(ErrorCode::Liveness, "signing did not succeed within 64 attempts");
}

std::vector<uint64_t> mint_tokens(World &world, Bank &bank, Receiver &rec, Cloud &cloud, size_t lambda,
                                  size_t count) {
    std::vector<uint64_t> out;
    for (size_t tries = 0; out.size() < count; tries++) {
        require(tries < 64 * count, ErrorCode::Liveness, "too many bank aborts while minting");
        MintSessionResult r = run_mint_session(world, bank, rec, cloud, lambda);
        if (!r.aborted) {
            out.push_back(r.token_id);
        }
    }
    return out;
}

TokenCertificate bank_issue_certificate(World &world, Bank &bank, const std::vector<std::string> &pks,
                                        uint64_t value) {
    require(!pks.empty(), ErrorCode::InvalidArgument, "certificate needs at least one public key");
    std::set<std::string> seen;
    for (const auto &pk : pks) {
        require(seen.insert(pk).second, ErrorCode::InvalidArgument, "duplicate public key in certificate");
        require(bank.pk_owner.count(pk) > 0, ErrorCode::InvalidArgument, "public key was not minted by this bank");
    }
    TokenCertificate cert;
    cert.pks = pks;
    cert.value = value;
    // Serials are pks.size() bits; redraw on collision until the space runs out.
    const size_t bits = pks.size();
    for (size_t tries = 0;; tries++) {
        require(tries < 64 * (size_t{1} << std::min<size_t>(bits, 16)), ErrorCode::Capacity,
                "serial space exhausted");
        cert.serial = BitVector::random(bits, bank.rng);
        if (world.ledger.reserve_serial(cert.serial)) {
            break;
        }
    }
    cert.signature = bank.signer->sign(cert.signed_bytes());
    world.ledger.issue(cert.serial, value);
    return cert;
}

bool verify_certificate(const World &world, const TokenCertificate &cert) {
    init_sodium();
    auto pk = hex_bytes<crypto_sign_PUBLICKEYBYTES>(world.bank_verify_key, "public key");
    if (cert.signature.size() != 2 * crypto_sign_BYTES) {
        return false;
    }
    auto sig = hex_bytes<crypto_sign_BYTES>(cert.signature, "signature");
    std::string msg = cert.signed_bytes();
    return crypto_sign_verify_detached(sig.data(), reinterpret_cast<const uint8_t *>(msg.data()), msg.size(),
                                       pk.data()) == 0;
}

std::optional<size_t> check_transfer(const World &world, const TokenCertificate &cert,
                                     const std::vector<BitVector> &sigmas, const BitVector &serial) {
    const size_t n = cert.pks.size();
    if (!verify_certificate(world, cert) || sigmas.size() != n || serial.size() != n) {
        return n;
    }
    for (size_t i = 0; i < n; i++) {
        PublicKey pk = world.oracles.resolve(cert.pks[i]);
        if (!check_signature(pk, serial.get(i), sigmas[i])) {
            return i;
        }
    }
    return std::nullopt;
}

namespace {

std::vector<BitVector> sign_wallet(World &world, Receiver &holder, Cloud &cloud, const BitVector &serial,
                                   const TransferOptions &options) {
    require(holder.wallet.has_value(), ErrorCode::Protocol, "holder has no wallet");
    const Wallet &w = *holder.wallet;
    require(serial.size() == w.tokens.size(), ErrorCode::Protocol, "serial length does not match the wallet");
    std::vector<BitVector> sigmas;
    for (size_t i = 0; i < w.tokens.size(); i++) {
        bool bit = serial.get(i) != (options.forge_index && *options.forge_index == i);
        sigmas.push_back(run_sign_session(world, holder, cloud, w.tokens[i], bit).sigma);
    }
    return sigmas;
}

Json sigma_list(const std::vector<BitVector> &sigmas) {
    Json arr = Json::array();
    for (const auto &s : sigmas) {
        arr.push_back(s.hex());
    }
    return arr;
}

std::vector<BitVector> parse_sigmas(const Json &arr) {
    std::vector<BitVector> out;
    for (const auto &s : arr) {
        out.push_back(BitVector::from_hex(s.get<std::string>()));
    }
    return out;
}

}  // namespace

TransferResult run_transfer(World &world, Receiver &a, Cloud &cloud_a, Receiver &b, const TransferOptions &options) {
    require(a.wallet && !a.wallet->spent, ErrorCode::Protocol, "sender has no unspent wallet");
    require(b.wallet.has_value(), ErrorCode::Protocol, "payee has no wallet slot");
    Channel &ch = world.channel;
    const uint64_t session = ch.open_session();
    TransferResult out;

    Json got = ch.deliver(session, b.addr, a.addr, "transfer.serial", {{"serial", b.wallet->cert.serial.hex()}});
    BitVector s_b = BitVector::from_hex(got.at("serial").get<std::string>());
    out.sigmas = sign_wallet(world, a, cloud_a, s_b, options);
    a.wallet->spent = true;
    got = ch.deliver(session, a.addr, b.addr, "transfer.signatures",
                     {{"cert", a.wallet->cert.to_json()}, {"sigmas", sigma_list(out.sigmas)}});

    TokenCertificate cert = TokenCertificate::from_json(got.at("cert"));
    out.first_failure = check_transfer(world, cert, parse_sigmas(got.at("sigmas")), b.wallet->cert.serial);
    out.accepted = !out.first_failure && !world.ledger.retired(cert.serial);
    if (out.accepted) {
        world.ledger.transfer(cert.serial, b.wallet->cert.serial);
    }
    Json ev = {{"accepted", out.accepted}};
    if (out.first_failure) {
        ev["first_failure"] = *out.first_failure;
    }
    world.transcript.append_event(session, b.addr, "transfer", ev);
    return out;
}

RedeemResult redeem(World &world, Receiver &holder, Cloud &cloud, Bank &bank, const TransferOptions &options) {
    require(holder.wallet.has_value(), ErrorCode::Protocol, "holder has no wallet");
    Channel &ch = world.channel;
    const uint64_t session = ch.open_session();
    RedeemResult out;
    auto reject = [&](const std::string &reason) {
        out.reason = reason;
        ch.deliver(session, bank.addr, holder.addr, "redeem.result", {{"accepted", false}, {"reason", reason}});
        world.transcript.append_event(session, bank.addr, "redeem", {{"accepted", false}, {"reason", reason}});
        return out;
    };

    Json got = ch.deliver(session, holder.addr, bank.addr, "redeem.request", {{"cert", holder.wallet->cert.to_json()}});
    TokenCertificate cert = TokenCertificate::from_json(got.at("cert"));
    if (!verify_certificate(world, cert)) {
        return reject("certificate signature invalid");
    }
    if (world.ledger.retired(cert.serial)) {
        return reject("serial already retired");
    }

    BitVector challenge;
    for (size_t tries = 0;; tries++) {
        require(tries < 64 * (size_t{1} << std::min<size_t>(cert.pks.size(), 16)), ErrorCode::Capacity,
                "serial space exhausted");
        challenge = BitVector::random(cert.pks.size(), bank.rng);
        if (world.ledger.reserve_serial(challenge)) {
            break;
        }
    }
    got = ch.deliver(session, bank.addr, holder.addr, "redeem.challenge", {{"serial", challenge.hex()}});

    std::vector<BitVector> sigmas =
        sign_wallet(world, holder, cloud, BitVector::from_hex(got.at("serial").get<std::string>()), options);
    holder.wallet->spent = true;
    got = ch.deliver(session, holder.addr, bank.addr, "redeem.signatures", {{"sigmas", sigma_list(sigmas)}});

    sigmas = parse_sigmas(got.at("sigmas"));
    if (auto bad = check_transfer(world, cert, sigmas, challenge)) {
        return reject("signature " + std::to_string(*bad) + " fails its public oracle");
    }
    // Second opinion from the bank's own records of each coset.
    for (size_t i = 0; i < cert.pks.size(); i++) {
        auto owner = bank.pk_owner.find(cert.pks[i]);
        if (owner == bank.pk_owner.end()) {
            return reject("unknown token");
        }
        const BankTokenSecrets &sec = bank.secrets.at(owner->second);
        BitVector offset = challenge.get(i) ? sec.x ^ sec.w : sec.x;
        if (!coset_contains(Coset(sec.s0, offset), sigmas[i])) {
            return reject("signature " + std::to_string(i) + " outside the bank's coset");
        }
    }
    out.payout = world.ledger.redeem(cert.serial);
    out.accepted = true;
    ch.deliver(session, bank.addr, holder.addr, "redeem.result", {{"accepted", true}, {"payout", out.payout}});
    world.transcript.append_event(session, bank.addr, "redeem", {{"accepted", true}, {"payout", out.payout}});
    return out;
}

// Role isolation -------------------------------------------------------------

namespace {

void add_vector(std::vector<PrivateValue> &out, const std::string &label, const BitVector &v) {
    if (v.size() >= kMinScannedBits) {
        out.push_back({label, {v.str(), v.hex()}});
    }
}

void add_matrix(std::vector<PrivateValue> &out, const std::string &label, const BitMatrix &m) {
    out.push_back({label, {m.str(), m.str_hex()}});
    add_vector(out, label + ".flat", flatten(m));
}

void walk_names(const Json &j, const std::string &where, std::vector<std::string> &findings) {
    if (j.is_object()) {
        for (const auto &[key, value] : j.items()) {
            if (denied_field_names().count(key)) {
                findings.push_back(where + ": field '" + key + "' is role-private");
            }
            walk_names(value, where, findings);
        }
    } else if (j.is_array()) {
        for (const auto &value : j) {
            walk_names(value, where, findings);
        }
    }
}

}  // namespace

std::vector<PrivateValue> private_values(const Bank &bank, const std::vector<const Receiver *> &receivers) {
    std::vector<PrivateValue> out;
    for (const auto &[id, sec] : bank.secrets) {
        std::string t = "token " + std::to_string(id) + " ";
        add_matrix(out, t + "M_S", sec.ms);
        add_matrix(out, t + "p_x", sec.px);
        add_vector(out, t + "x", sec.x);
        add_vector(out, t + "z", sec.z);
        add_vector(out, t + "x|z", sec.x.concat(sec.z));
    }
    for (const Receiver *rec : receivers) {
        for (const auto &[id, keys] : rec->keys) {
            std::string t = rec->addr.str() + " token " + std::to_string(id) + " ";
            add_vector(out, t + "R", keys.r);
            add_vector(out, t + "X_R|Z_R", pad_to_bits(keys.pads));
            add_vector(out, t + "X_R", keys.pads.x);
            add_vector(out, t + "Z_R", keys.pads.z);
        }
    }
    return out;
}

const std::set<std::string> &denied_field_names() {
    static const std::set<std::string> names = {"ms",   "m_s", "px",       "p_x",     "x",         "z",
                                                "r",    "e",   "w",        "s0",      "x_r",       "z_r",
                                                "pads", "sk",  "secret",   "secrets", "trapdoor",  "plaintext",
                                                "fhek", "key", "rec_keys", "reckey",  "secret_key"};
    return names;
}

std::vector<std::string> scan_transcript(const Transcript &transcript, const std::vector<PrivateValue> &values) {
    std::vector<std::string> findings;
    for (const auto &line : transcript.lines()) {
        if (line.rfind("EVENT|", 0) == 0) {
            continue;  // role-local records never leave the actor
        }
        Envelope e = decode_envelope(line);
        std::string where = "session " + std::to_string(e.session) + " seq " + std::to_string(e.seq);
        walk_names(Json::parse(e.payload), where, findings);
        for (const auto &v : values) {
            for (const auto &form : v.forms) {
                if (line.find(form) != std::string::npos) {
                    findings.push_back(where + ": contains " + v.label);
                }
            }
        }
    }
    return findings;
}

}  // namespace csqm
