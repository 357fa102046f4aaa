// SPDX-License-Identifier: Apache-2.0

#include "riadof/end_to_end.hpp"

#include "riadof/phase_verify.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace riadof {

std::string to_string(SymbolKind k)
{
    switch (k) {
    case SymbolKind::Private: return "private";
    case SymbolKind::OrderM: return "order-m";
    case SymbolKind::Order1m: return "order-1m";
    case SymbolKind::Overheard: return "overheard";
    }
    return "?";
}

int SymbolId::order() const
{
    switch (kind) {
    case SymbolKind::Private: return 1;
    case SymbolKind::OrderM: return static_cast<int>(desired.size());
    case SymbolKind::Order1m: return static_cast<int>(known.size()) + 1;
    case SymbolKind::Overheard: return 0;
    }
    return 0;
}

std::string SymbolId::name() const
{
    std::ostringstream os;
    auto list = [&os](const std::vector<int>& v) {
        for (size_t i = 0; i < v.size(); ++i)
            os << (i ? "," : "") << v[i];
    };
    os << "u[" << origin << '|';
    list(desired);
    if (!known.empty()) {
        os << ';';
        list(known);
    }
    os << "]#" << index;
    return os.str();
}

// ---------------------------------------------------------------------------------------------

ChainPlan chain_plan(const SystemConfig& cfg, const ScheduleChoice& choice)
{
    const SystemConfig c = clamp_antennas(cfg).cfg;
    if (c.K != 3)
        throw std::invalid_argument("chained execution is defined for three users only");
    validate(choice, c);
    ChainPlan p;
    p.cfg = c;
    p.choice = choice;
    p.phase1 = ledger_phase1(choice, c);
    p.phase2 = ledger_phase_m(2, c);
    const Rational repeats = p.phase1.counts.next_order / p.phase2.counts.sent;  // phase2 / phase1 repeats
    p.phase1_repeats = static_cast<int>(Rational::from_mpq(mpq_class(repeats.denominator())).to_int64());
    p.phase2_repeats = static_cast<int>(Rational::from_mpq(mpq_class(repeats.numerator())).to_int64());
    p.d3 = d_order_m_closed(c, 3);
    p.d12 = d_order_1m(c, 2);

    const Rational b1(p.phase1_repeats);
    const Rational b2(p.phase2_repeats);
    auto whole = [](const Rational& r, const char* what) {
        if (!r.is_integer())
            throw LedgerMismatch(std::string("non-integral chained count: ") + what);
        return static_cast<long long>(r.to_int64());
    };
    const PhaseEntry& e1 = p.phase1.counts;
    const PhaseEntry& e2 = p.phase2.counts;
    p.expected = {
        {"phase1", whole(b1 * e1.sent, "phase-1 symbols"), whole(b1 * e1.slots, "phase-1 slots"),
         whole(b1 * e1.next_order, "order-2 symbols"), 0},
        {"phase2", whole(b2 * e2.sent, "phase-2 symbols"), whole(b2 * e2.slots, "phase-2 slots"),
         whole(b2 * e2.next_order, "order-3 symbols"), whole(b2 * e2.order_1m, "order-(1,2) symbols")},
        {"phase3-I", whole(b2 * e2.next_order, "order-3 symbols"), whole(b2 * e2.next_order / p.d3, "phase-3-I slots"), 0, 0},
        {"phase3-II", whole(b2 * e2.order_1m, "order-(1,2) symbols"), whole(b2 * e2.order_1m / p.d12, "phase-3-II slots"), 0, 0},
    };
    for (const auto& e : p.expected)
        p.total_slots += e.slots;
    p.private_symbols = p.expected.front().sent;
    p.ratio = Rational(p.private_symbols) / Rational(p.total_slots);
    return p;
}

ChainPlan scheme_plan(const std::string& scheme)
{
    if (scheme == "313")
        return chain_plan({3, 1, 3}, {3, Scheme::MatLike});
    if (scheme == "313-pair")
        return chain_plan({2, 1, 3}, {2, Scheme::MatLike});
    if (scheme == "323")
        return chain_plan({3, 2, 3}, {3, Scheme::RtPin});
    throw std::invalid_argument("unknown scheme '" + scheme + "' (expected 313, 313-pair or 323)");
}

AuditResult ledger_audit(const DecodingReport& report, const ChainPlan& expected)
{
    AuditResult out;
    if (report.phases.size() != expected.expected.size())
        out.mismatches.push_back("phase count " + std::to_string(report.phases.size()) + " != " +
                                 std::to_string(expected.expected.size()));
    const size_t n = std::min(report.phases.size(), expected.expected.size());
    for (size_t i = 0; i < n; ++i) {
        const PhaseCount& got = report.phases[i];
        const PhaseCount& want = expected.expected[i];
        auto cmp = [&](const char* field, long long a, long long b) {
            if (a != b)
                out.mismatches.push_back(want.phase + " " + field + ": executed " + std::to_string(a) + ", ledger " +
                                         std::to_string(b));
        };
        if (got.phase != want.phase)
            out.mismatches.push_back("phase " + std::to_string(i) + " is " + got.phase + ", ledger " + want.phase);
        cmp("sent", got.sent, want.sent);
        cmp("slots", got.slots, want.slots);
        cmp("generated", got.generated, want.generated);
        cmp("generated_1m", got.generated_1m, want.generated_1m);
    }
    if (report.total_slots != expected.total_slots)
        out.mismatches.push_back("total slots " + std::to_string(report.total_slots) + ", ledger " +
                                 std::to_string(expected.total_slots));
    if (report.private_symbols != expected.private_symbols)
        out.mismatches.push_back("private symbols " + std::to_string(report.private_symbols) + ", ledger " +
                                 std::to_string(expected.private_symbols));
    out.ok = out.mismatches.empty();
    return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

constexpr double kDecodeTolerance = 1e-7;
constexpr double kLearnTolerance = 1e-9;

// Orthonormal rows over the private-symbol vector whose values a receiver has established.
class KnowledgeBase {
public:
    explicit KnowledgeBase(Index symbols) : basis_(symbols, symbols), values_(symbols) {}

    struct Outcome {
        bool ok = false;
        ComplexVector values;
        double residual = 0.0;
    };

    bool knows(const ComplexMatrix& X) const
    {
        const double scale = X.norm();
        return scale == 0.0 || (X - project(X)).norm() <= kDecodeTolerance * scale;
    }

    // Values of X u from the known rows plus observations O u = o, when X lies in their span.
    Outcome evaluate(const ComplexMatrix& X, const ComplexMatrix& O, const ComplexVector& o) const
    {
        Outcome out;
        const auto Q = basis_.topRows(rank_);
        const auto v = values_.head(rank_);
        const ComplexMatrix XQ = X * Q.adjoint();
        const ComplexMatrix Xr = X - XQ * Q;
        out.values = XQ * v;
        const double scale = X.norm() > 0.0 ? X.norm() : 1.0;
        if (O.rows() == 0) {
            out.residual = Xr.norm() / scale;
        } else {
            const ComplexMatrix OQ = O * Q.adjoint();
            const ComplexMatrix Or = O - OQ * Q;
            const ComplexVector orr = o - OQ * v;
            Eigen::JacobiSVD<ComplexMatrix> svd(Or.adjoint(), Eigen::ComputeThinU | Eigen::ComputeThinV);
            svd.setThreshold(kLearnTolerance);
            const ComplexMatrix A = svd.solve(Xr.adjoint()).adjoint();
            out.residual = (A * Or - Xr).norm() / scale;
            out.values += A * orr;
        }
        out.ok = out.residual < kDecodeTolerance;
        return out;
    }

    void learn(const ComplexMatrix& X, const ComplexVector& xv)
    {
        ComplexMatrix Xr = X;
        ComplexVector vr = xv;
        for (int pass = 0; pass < 2; ++pass) {
            const auto Q = basis_.topRows(rank_);
            const ComplexMatrix XQ = Xr * Q.adjoint();
            Xr -= XQ * Q;
            vr -= XQ * values_.head(rank_);
        }
        if (Xr.rows() == 0)
            return;
        Eigen::JacobiSVD<ComplexMatrix> svd(Xr, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& s = svd.singularValues();
        const double cut = kLearnTolerance * X.norm();
        const ComplexVector uv = svd.matrixU().adjoint() * vr;
        for (Index i = 0; i < s.size() && s(i) > cut && rank_ < basis_.rows(); ++i) {
            basis_.row(rank_) = svd.matrixV().col(i).adjoint();
            values_(rank_) = uv(i) / s(i);
            ++rank_;
        }
    }

private:
    ComplexMatrix project(const ComplexMatrix& X) const
    {
        const auto Q = basis_.topRows(rank_);
        return (X * Q.adjoint()) * Q;
    }

    ComplexMatrix basis_;
    ComplexVector values_;
    Index rank_ = 0;
};

struct Symbol {
    SymbolId id;
    RowVector row;
    int available_from = 1;  // first slot at which the origin transmitter can form it
};

// Backward-decoding categories, in schedule order.
enum Category { kOrder3, kOwnOverheard, kOthersOverheard, kOrder1m, kOwnPieces, kOrder2, kPrivate, kCategories };

struct PendingStep {
    std::string label;
    std::vector<int> symbols;
    std::vector<int> sources;
    std::vector<int> must_know;
};

enum PhaseSlot { kPhase1, kPhase2, kPhase3I, kPhase3II };

std::vector<std::vector<int>> combinations(int K, int n)
{
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int start) -> void {
        if (static_cast<int>(cur.size()) == n) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i < K; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

std::vector<int> sorted_pair(int a, int b) { return a < b ? std::vector<int>{a, b} : std::vector<int>{b, a}; }

class Engine {
public:
    Engine(std::string scheme, const ChainPlan& plan, const SystemConfig& physical, std::uint64_t seed, double threshold,
           const RunOptions& opt)
        : scheme_(std::move(scheme)),
          plan_(plan),
          phys_(physical),
          build_(plan.cfg),
          seed_(seed),
          threshold_(threshold),
          opt_(opt),
          audit_(opt.audit ? opt.audit : &own_audit_),
          T_(static_cast<int>(plan.total_slots)),
          P_(static_cast<Index>(plan.private_symbols)),
          real_(ChannelRealization::generate(physical, T_, seed)),
          precoder_rng_(seed, Stream::Precoder),
          combiner_rng_(seed, Stream::Combiner)
    {
        if (build_.M < phys_.M) {
            restricted_ = ChannelRealization::generate(build_, T_, seed);
            for (int t = 1; t <= T_; ++t)
                for (int k = 0; k < phys_.K; ++k)
                    for (int j = 0; j < phys_.K; ++j)
                        restricted_->set(k, j, t, real_.channel(k, j, t).leftCols(build_.M));
        }
        RngStream sym(seed, Stream::Symbol);
        u_ = random_complex_gaussian(P_, 1, sym);
        signals_.assign(static_cast<size_t>(T_) + 1,
                        std::vector<ComplexMatrix>(static_cast<size_t>(phys_.K), ComplexMatrix::Zero(phys_.M, P_)));
        slot_plans_.resize(static_cast<size_t>(T_) + 1);
        const auto K = static_cast<size_t>(phys_.K);
        pool_.assign(K, std::vector<std::vector<int>>(K));
        overheard_.assign(K, std::vector<std::vector<std::vector<int>>>(K));
        privates_.assign(K, {});
        pending_.assign(K, std::array<std::vector<PendingStep>, kCategories>{});
        phases_ = {PhaseCount{"phase1"}, PhaseCount{"phase2"}, PhaseCount{"phase3-I"}, PhaseCount{"phase3-II"}};
        obs_.assign(K, std::vector<std::optional<ComplexMatrix>>(static_cast<size_t>(T_) + 1));
    }

    DecodingReport run()
    {
        const std::uint64_t granted0 = audit_->granted();
        const std::uint64_t violations0 = audit_->violations();
        int slot = 1;
        slot = phase1(slot);
        slot = phase2(slot);
        generate_phase3(slot);
        slot = phase3_first(slot);
        slot = phase3_second(slot);
        if (slot != T_ + 1)
            throw LedgerMismatch("executed " + std::to_string(slot - 1) + " slots, planned " + std::to_string(T_));

        DecodingReport r;
        r.scheme = scheme_;
        r.cfg = phys_;
        r.seed = seed_;
        r.total_slots = T_;
        r.private_symbols = static_cast<int>(P_);
        r.error_threshold = threshold_;
        r.ratio = Rational(static_cast<long>(P_)) / Rational(T_);
        r.max_antennas_used = max_antennas_;
        r.combiner_min_singular_ratio = combiner_min_ratio_;
        r.causal_ok = causal_ok_;
        r.phases = phases_;
        decode(r);
        r.csit_granted = audit_->granted() - granted0;
        r.csit_violations = audit_->violations() - violations0;
        for (int t = 1; t <= T_; ++t)
            r.slots.push_back(slot_plans_[static_cast<size_t>(t)]);
        r.failures.insert(r.failures.end(), failures_.begin(), failures_.end());
        const AuditResult audit = ledger_audit(r, plan_);
        for (const auto& m : audit.mismatches)
            r.failures.push_back("ledger: " + m);
        if (r.csit_violations > 0)
            r.failures.push_back("precoder builders requested current or future channel state");
        if (!r.causal_ok)
            r.failures.push_back("an emission depends on channel state of its own or a later slot");
        if (!r.order_ok)
            r.failures.push_back("decoding schedule is not in backward order");
        bool all_recovered = true;
        for (size_t k = 0; k < r.intended.size(); ++k)
            all_recovered = all_recovered && r.recovered[k] == r.intended[k];
        r.pass = r.failures.empty() && all_recovered && r.max_relative_error < threshold_;
        if (!r.pass && opt_.dump_dir) {
            std::filesystem::create_directories(*opt_.dump_dir);
            std::ofstream out(*opt_.dump_dir / (scheme_ + "_seed" + std::to_string(seed_) + ".bin"), std::ios::binary);
            dump_realization(real_, out);
        }
        return r;
    }

private:
    const ChannelRealization& build_real() const { return restricted_ ? *restricted_ : real_; }

    int add_symbol(int origin, SymbolKind kind, std::vector<int> desired, std::vector<int> known, RowVector row,
                   int available_from)
    {
        int& next = next_index_[{origin, static_cast<int>(kind)}];
        symbols_.push_back({SymbolId{origin, kind, std::move(desired), std::move(known), next++}, std::move(row), available_from});
        return static_cast<int>(symbols_.size()) - 1;
    }

    ComplexMatrix rows(const std::vector<int>& idx) const
    {
        ComplexMatrix R(static_cast<Index>(idx.size()), P_);
        for (size_t i = 0; i < idx.size(); ++i)
            R.row(static_cast<Index>(i)) = symbols_[static_cast<size_t>(idx[i])].row;
        return R;
    }

    std::vector<int> add_rows(int origin, SymbolKind kind, const std::vector<int>& desired, const std::vector<int>& known,
                              const ComplexMatrix& R, int available_from)
    {
        std::vector<int> out;
        for (Index i = 0; i < R.rows(); ++i)
            out.push_back(add_symbol(origin, kind, desired, known, R.row(i), available_from));
        return out;
    }

    // Tx sends precoder * (symbol rows); the precoder has one row per usable antenna.
    void emit(int slot, int tx, const ComplexMatrix& precoder, const std::vector<int>& idx, PhaseSlot phase, int csit_through)
    {
        if (slot < 1 || slot > T_)
            throw LedgerMismatch("emission outside the planned " + std::to_string(T_) + " slots");
        if (precoder.rows() > phys_.M || precoder.cols() != static_cast<Index>(idx.size()))
            throw std::logic_error("precoder does not match the emission");
        ComplexMatrix& S = signals_[static_cast<size_t>(slot)][static_cast<size_t>(tx)];
        S.topRows(precoder.rows()) += precoder * rows(idx);

        TxEmission e;
        e.tx = tx;
        e.csit_through = csit_through;
        for (int i : idx) {
            const Symbol& s = symbols_[static_cast<size_t>(i)];
            e.symbols.push_back(s.id.name());
            e.csit_through = std::max(e.csit_through, s.available_from - 1);
        }
        for (Index a = 0; a < precoder.rows(); ++a)
            if (precoder.row(a).norm() > 0.0)
                ++e.antennas;
        max_antennas_ = std::max(max_antennas_, e.antennas);
        if (e.csit_through >= slot)
            causal_ok_ = false;
        SlotPlan& sp = slot_plans_[static_cast<size_t>(slot)];
        if (sp.emissions.empty()) {
            sp.slot = slot;
            sp.phase = phases_[phase].phase;
            ++phases_[phase].slots;
        }
        sp.emissions.push_back(std::move(e));
        for (int i : idx)
            if (sent_[phase].insert(i).second)
                ++phases_[phase].sent;
    }

    void add_step(Category cat, int user, std::string label, std::vector<int> symbols, std::vector<int> sources,
                  std::vector<int> must_know = {})
    {
        pending_[static_cast<size_t>(user)][cat].push_back({std::move(label), std::move(symbols), std::move(sources), std::move(must_know)});
    }

    std::vector<int> new_privates(int tx, Index count)
    {
        std::vector<int> out;
        for (Index i = 0; i < count; ++i) {
            const auto g = static_cast<Index>(private_count_++);
            if (g >= P_)
                throw LedgerMismatch("more private symbols than planned");
            RowVector e = RowVector::Zero(P_);
            e(g) = 1.0;
            out.push_back(add_symbol(tx, SymbolKind::Private, {tx}, {}, std::move(e), 1));
            privates_[static_cast<size_t>(tx)].push_back(out.back());
        }
        return out;
    }

    void add_order2(int origin, int observer, const ComplexMatrix& R, int available_from)
    {
        const auto ids = add_rows(origin, SymbolKind::OrderM, sorted_pair(origin, observer), {}, R, available_from);
        auto& pool = pool_[static_cast<size_t>(origin)][static_cast<size_t>(observer)];
        pool.insert(pool.end(), ids.begin(), ids.end());
        phases_[kPhase1].generated += static_cast<long long>(ids.size());
    }

    int phase1(int slot)
    {
        const int n = plan_.choice.n;
        const Index Mb = build_.M;
        for (int rep = 0; rep < plan_.phase1_repeats; ++rep)
            for (const auto& users : combinations(phys_.K, n)) {
                const auto nn = static_cast<size_t>(n);
                std::vector<std::vector<int>> priv(nn);
                int block_slots = 0;
                std::string label;
                if (plan_.choice.scheme == Scheme::MatLike) {
                    const MatBlock b = build_mat_block(build_, users, slot, build_real(), audit_, precoder_rng_);
                    block_slots = b.slots;
                    for (size_t a = 0; a < nn; ++a)
                        priv[a] = new_privates(users[a], b.streams);
                    for (int s = 0; s < b.slots; ++s)
                        for (size_t a = 0; a < nn; ++a)
                            emit(slot + s, users[a], b.W[a].middleRows(s * Mb, Mb), priv[a], kPhase1, 0);
                    for (size_t a = 0; a < nn; ++a)
                        for (size_t c = 0; c < nn; ++c)
                            if (a != c)
                                add_order2(users[a], users[c], b.PG[c][a] * rows(priv[a]), slot + b.slots);
                    label = "mat";
                } else {
                    const RtPinBlock b = build_rtpin_block(build_, n, users, slot, build_real(), audit_, precoder_rng_);
                    block_slots = b.t1 + b.t2;
                    for (size_t a = 0; a < nn; ++a)
                        priv[a] = new_privates(users[a], b.streams);
                    for (int s = 0; s < b.t1; ++s)
                        for (size_t a = 0; a < nn; ++a)
                            emit(slot + s, users[a], b.W_is[a].middleRows(s * Mb, Mb), priv[a], kPhase1, 0);
                    for (int s = 0; s < b.t2; ++s)
                        for (size_t a = 0; a < nn; ++a)
                            emit(slot + b.t1 + s, users[a], b.W_rt[a].middleRows(s * Mb, Mb), priv[a], kPhase1,
                                 slot + b.t1 - 1);
                    for (size_t l = 0; l < nn; ++l)
                        for (size_t k = 0; k < nn; ++k)
                            for (size_t j = 0; j < nn; ++j)
                                if (l != k && j != k && j != l)
                                    add_order2(users[l], users[k], rtpin_projected(b, k, l, j) * rows(priv[l]),
                                               slot + block_slots);
                    label = "rtpin";
                }
                const std::vector<int> sources = slot_range(slot, block_slots);
                for (size_t a = 0; a < nn; ++a)
                    add_step(kPrivate, users[a], "private " + label + " block@" + std::to_string(slot), priv[a], sources);
                slot += block_slots;
            }
        return slot;
    }

    int phase2(int slot)
    {
        const Index Mb = build_.M;
        std::vector<std::vector<size_t>> used(static_cast<size_t>(phys_.K), std::vector<size_t>(static_cast<size_t>(phys_.K), 0));
        auto take = [&](int tx, int other, Index count) {
            auto& pool = pool_[static_cast<size_t>(tx)][static_cast<size_t>(other)];
            size_t& u = used[static_cast<size_t>(tx)][static_cast<size_t>(other)];
            if (u + static_cast<size_t>(count) > pool.size())
                throw LedgerMismatch("order-2 pool of Tx " + std::to_string(tx) + " for user " + std::to_string(other) +
                                     " exhausted");
            std::vector<int> out(pool.begin() + static_cast<std::ptrdiff_t>(u),
                                 pool.begin() + static_cast<std::ptrdiff_t>(u + static_cast<size_t>(count)));
            u += static_cast<size_t>(count);
            return out;
        };
        for (int round = 0; round < plan_.phase2_repeats; ++round)
            for (const auto& pair : combinations(phys_.K, 2))
                for (int which = 0; which < 2; ++which) {
                    const int leader = pair[static_cast<size_t>(which)];
                    const int partner = pair[static_cast<size_t>(1 - which)];
                    const PhaseMBlock b = build_phase_m_block(build_, 2, pair, leader, partner, slot, build_real(), audit_,
                                                              precoder_rng_);
                    const std::vector<int> lead_syms = take(leader, partner, b.leader_streams);
                    const std::vector<int> part_syms = b.partner >= 0 ? take(partner, leader, b.partner_streams) : std::vector<int>{};
                    for (int s = 0; s < b.slots; ++s) {
                        emit(slot + s, leader, b.W_leader.middleRows(s * Mb, Mb), lead_syms, kPhase2, 0);
                        if (!part_syms.empty())
                            emit(slot + s, partner, b.W_partner.middleRows(s * Mb, Mb), part_syms, kPhase2, 0);
                    }
                    const std::vector<int> sources = slot_range(slot, b.slots);
                    const std::string tag = "@" + std::to_string(slot);
                    for (int c : b.others) {
                        const ComplexMatrix R = b.F[static_cast<size_t>(c)] * b.G_leader[static_cast<size_t>(c)] * rows(lead_syms);
                        const auto ids = add_rows(leader, SymbolKind::Overheard, pair, {c}, R, slot + b.slots);
                        overheard_[static_cast<size_t>(leader)][static_cast<size_t>(c)].push_back(ids);
                        add_step(kOwnOverheard, c, "overheard" + tag, ids, sources);
                    }
                    std::vector<int> both = lead_syms;
                    both.insert(both.end(), part_syms.begin(), part_syms.end());
                    for (int k : pair)
                        add_step(kOrder2, k, "order-2" + tag, both, sources);
                    slot += b.slots;
                }
        for (size_t a = 0; a < used.size(); ++a)
            for (size_t b = 0; b < used.size(); ++b)
                if (used[a][b] != pool_[a][b].size())
                    throw LedgerMismatch("order-2 pool of Tx " + std::to_string(a) + " for user " + std::to_string(b) +
                                         " not fully delivered");
        return slot;
    }

    void generate_phase3(int slot)
    {
        const int K = phys_.K;
        order3_.assign(static_cast<size_t>(K), {});
        order1m_.assign(static_cast<size_t>(K), {});
        combiner_min_ratio_ = 1.0;
        for (int L = 0; L < K; ++L) {
            std::vector<int> others;
            for (int k = 0; k < K; ++k)
                if (k != L)
                    others.push_back(k);
            const int o1 = others[0];
            const int o2 = others[1];
            const auto& seen_by_o2 = overheard_[static_cast<size_t>(L)][static_cast<size_t>(o2)];
            const auto& seen_by_o1 = overheard_[static_cast<size_t>(L)][static_cast<size_t>(o1)];
            if (seen_by_o1.size() != seen_by_o2.size())
                throw LedgerMismatch("unbalanced overheard pieces");
            for (size_t r = 0; r < seen_by_o2.size(); ++r) {
                const std::vector<int>& p1 = seen_by_o2[r];
                const std::vector<int>& p2 = seen_by_o1[r];
                const auto d = static_cast<Index>(p1.size());
                const ComplexMatrix mix = random_complex_gaussian(2 * d, 2 * d, combiner_rng_);
                const Eigen::VectorXd s = singular_values(mix);
                combiner_min_ratio_ = std::min(combiner_min_ratio_, s(s.size() - 1) / s(0));
                if (numeric_rank(mix) != 2 * d)
                    failures_.push_back("order-3 and order-(1,2) combinations of Tx " + std::to_string(L) + " are dependent");
                const ComplexMatrix R = stack({rows(p1), rows(p2)});
                const auto o3 = add_rows(L, SymbolKind::OrderM, {0, 1, 2}, {}, mix.topRows(d) * R, slot);
                const auto o12 = add_rows(L, SymbolKind::Order1m, {L}, others, mix.bottomRows(d) * R, slot);
                order3_[static_cast<size_t>(L)].insert(order3_[static_cast<size_t>(L)].end(), o3.begin(), o3.end());
                order1m_[static_cast<size_t>(L)].insert(order1m_[static_cast<size_t>(L)].end(), o12.begin(), o12.end());
                phases_[kPhase2].generated += d;
                phases_[kPhase2].generated_1m += d;
                const std::string tag = " Tx" + std::to_string(L) + " round " + std::to_string(r);
                add_step(kOthersOverheard, o2, "others' overheard" + tag, p2, {});
                add_step(kOthersOverheard, o1, "others' overheard" + tag, p1, {});
                std::vector<int> both = p1;
                both.insert(both.end(), p2.begin(), p2.end());
                add_step(kOwnPieces, L, "own pieces" + tag, both, {});
            }
        }
    }

    std::vector<std::vector<int>> chunks(const std::vector<int>& v) const
    {
        const auto N = static_cast<size_t>(build_.N);
        if (v.size() % N != 0)
            throw LedgerMismatch("symbol count not a multiple of the receive dimension");
        std::vector<std::vector<int>> out;
        for (size_t i = 0; i < v.size(); i += N)
            out.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(i), v.begin() + static_cast<std::ptrdiff_t>(i + N));
        return out;
    }

    int phase3_first(int slot)
    {
        for (int L = 0; L < phys_.K; ++L)
            for (const auto& c : chunks(order3_[static_cast<size_t>(L)])) {
                emit(slot, L, random_complex_gaussian(build_.M, build_.N, precoder_rng_), c, kPhase3I, 0);
                for (int k = 0; k < phys_.K; ++k)
                    add_step(kOrder3, k, "order-3 @" + std::to_string(slot), c, {slot});
                ++slot;
            }
        return slot;
    }

    int phase3_second(int slot)
    {
        std::vector<std::vector<std::vector<int>>> per_tx;
        for (int L = 0; L < phys_.K; ++L)
            per_tx.push_back(chunks(order1m_[static_cast<size_t>(L)]));
        for (const auto& c : per_tx)
            if (c.size() != per_tx.front().size())
                throw LedgerMismatch("unequal order-(1,2) counts across transmitters");
        for (size_t i = 0; i < per_tx.front().size(); ++i) {
            for (int L = 0; L < phys_.K; ++L)
                emit(slot, L, random_complex_gaussian(build_.M, build_.N, precoder_rng_), per_tx[static_cast<size_t>(L)][i],
                     kPhase3II, 0);
            for (int k = 0; k < phys_.K; ++k) {
                std::vector<int> interference;
                for (int L = 0; L < phys_.K; ++L)
                    if (L != k)
                        interference.insert(interference.end(), per_tx[static_cast<size_t>(L)][i].begin(),
                                            per_tx[static_cast<size_t>(L)][i].end());
                add_step(kOrder1m, k, "order-(1,2) @" + std::to_string(slot), per_tx[static_cast<size_t>(k)][i], {slot},
                         interference);
            }
            ++slot;
        }
        return slot;
    }

    const ComplexMatrix& observation(int k, int t)
    {
        auto& cached = obs_[static_cast<size_t>(k)][static_cast<size_t>(t)];
        if (!cached) {
            ComplexMatrix Y = ComplexMatrix::Zero(phys_.N, P_);
            for (int j = 0; j < phys_.K; ++j)
                Y += real_.channel(k, j, t) * signals_[static_cast<size_t>(t)][static_cast<size_t>(j)];
            cached = std::move(Y);
        }
        return *cached;
    }

    void decode(DecodingReport& r)
    {
        const int K = phys_.K;
        ComplexVector xhat = ComplexVector::Zero(P_);
        std::vector<bool> decoded(static_cast<size_t>(P_), false);
        r.order_ok = true;
        std::vector<Category> order{kOrder3, kOwnOverheard, kOthersOverheard, kOrder1m, kOwnPieces, kOrder2, kPrivate};
        if (opt_.private_first) {
            order.erase(std::find(order.begin(), order.end(), kPrivate));
            order.insert(order.begin(), kPrivate);
        }
        for (int k = 0; k < K; ++k) {
            KnowledgeBase kb(P_);
            int level = std::numeric_limits<int>::max();
            for (Category cat : order)
                for (const PendingStep& step : pending_[static_cast<size_t>(k)][cat]) {
                    DecodeStepResult res;
                    res.user = k;
                    res.label = step.label;
                    res.sources = step.sources;
                    for (int i : step.symbols) {
                        res.symbols.push_back(symbols_[static_cast<size_t>(i)].id.name());
                        res.order = std::max(res.order, symbols_[static_cast<size_t>(i)].id.order());
                    }
                    if (res.order > 0) {
                        if (res.order > level)
                            r.order_ok = false;
                        level = res.order;
                    }
                    for (int i : step.must_know)
                        if (!kb.knows(symbols_[static_cast<size_t>(i)].row))
                            res.prerequisites_known = false;
                    std::vector<ComplexMatrix> obs;
                    for (int t : step.sources)
                        obs.push_back(observation(k, t));
                    const ComplexMatrix O = obs.empty() ? ComplexMatrix(0, P_) : stack(obs);
                    const ComplexMatrix X = rows(step.symbols);
                    const ComplexVector o = O * u_;
                    const KnowledgeBase::Outcome out = kb.evaluate(X, O, o);
                    res.ok = out.ok;
                    res.residual = out.residual;
                    if (out.ok) {
                        kb.learn(X, out.values);
                        for (size_t i = 0; i < step.symbols.size(); ++i) {
                            const Symbol& s = symbols_[static_cast<size_t>(step.symbols[i])];
                            if (s.id.kind == SymbolKind::Private && s.id.origin == k) {
                                Index g = 0;
                                s.row.cwiseAbs().maxCoeff(&g);
                                xhat(g) = out.values(static_cast<Index>(i));
                                decoded[static_cast<size_t>(g)] = true;
                            }
                        }
                    } else {
                        failures_.push_back("user " + std::to_string(k) + ": " + step.label + " not decodable (residual " +
                                            std::to_string(out.residual) + ")");
                    }
                    if (!res.prerequisites_known)
                        failures_.push_back("user " + std::to_string(k) + ": " + step.label +
                                            " interference not known beforehand");
                    r.steps.push_back(std::move(res));
                }
        }

        r.intended.assign(static_cast<size_t>(K), 0);
        r.recovered.assign(static_cast<size_t>(K), 0);
        r.user_error.assign(static_cast<size_t>(K), 0.0);
        r.max_relative_error = 0.0;
        for (int k = 0; k < K; ++k) {
            const auto& mine = privates_[static_cast<size_t>(k)];
            double err2 = 0.0, ref2 = 0.0;
            for (int i : mine) {
                Index g = 0;
                symbols_[static_cast<size_t>(i)].row.cwiseAbs().maxCoeff(&g);
                err2 += std::norm(xhat(g) - u_(g));
                ref2 += std::norm(u_(g));
            }
            const double ref = std::sqrt(ref2);
            for (int i : mine) {
                Index g = 0;
                symbols_[static_cast<size_t>(i)].row.cwiseAbs().maxCoeff(&g);
                if (decoded[static_cast<size_t>(g)] && std::abs(xhat(g) - u_(g)) < threshold_ * ref)
                    ++r.recovered[static_cast<size_t>(k)];
            }
            r.intended[static_cast<size_t>(k)] = static_cast<int>(mine.size());
            r.user_error[static_cast<size_t>(k)] = ref > 0.0 ? std::sqrt(err2) / ref : std::sqrt(err2);
            r.max_relative_error = std::max(r.max_relative_error, r.user_error[static_cast<size_t>(k)]);
        }
    }

    std::string scheme_;
    ChainPlan plan_;
    SystemConfig phys_;
    SystemConfig build_;
    std::uint64_t seed_;
    double threshold_;
    RunOptions opt_;
    CsitAudit own_audit_;
    CsitAudit* audit_;
    int T_;
    Index P_;
    ChannelRealization real_;
    std::optional<ChannelRealization> restricted_;
    RngStream precoder_rng_;
    RngStream combiner_rng_;
    ComplexVector u_;

    std::vector<Symbol> symbols_;
    std::map<std::pair<int, int>, int> next_index_;
    size_t private_count_ = 0;
    std::vector<std::vector<ComplexMatrix>> signals_;  // [slot][tx]: M x P
    std::vector<SlotPlan> slot_plans_;
    std::vector<std::vector<std::vector<int>>> pool_;                   // [origin][observer]: order-2 symbols
    std::vector<std::vector<std::vector<std::vector<int>>>> overheard_; // [origin][observer][round]
    std::vector<std::vector<int>> privates_;
    std::vector<std::vector<int>> order3_;
    std::vector<std::vector<int>> order1m_;
    std::vector<std::array<std::vector<PendingStep>, kCategories>> pending_;
    std::vector<PhaseCount> phases_;
    std::array<std::set<int>, 4> sent_;  // distinct symbols per phase
    std::vector<std::vector<std::optional<ComplexMatrix>>> obs_;
    std::vector<std::string> failures_;
    int max_antennas_ = 0;
    double combiner_min_ratio_ = 0.0;
    bool causal_ok_ = true;
};

DecodingReport run_scheme(const std::string& scheme, const SystemConfig& physical, std::uint64_t seed, double threshold,
                          const RunOptions& opt)
{
    Engine engine(scheme, scheme_plan(scheme), physical, seed, threshold, opt);
    return engine.run();
}

} // namespace

DecodingReport run_313(std::uint64_t seed, const RunOptions& opt) { return run_scheme("313", {3, 1, 3}, seed, 1e-8, opt); }

DecodingReport run_313_pair(std::uint64_t seed, const RunOptions& opt)
{
    return run_scheme("313-pair", {3, 1, 3}, seed, 1e-8, opt);
}

DecodingReport run_323(std::uint64_t seed, const RunOptions& opt) { return run_scheme("323", {3, 2, 3}, seed, 1e-6, opt); }

} // namespace riadof
