"""
小區塊長度隨機碼模擬

巢狀子碼書的產生、隨機編碼、聯合典型解碼、以窮舉計算的洩漏量，
以及竊聽端 N(m1,m2,z^n) 統計量與其上界。只支援兩個使用者。
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.core.errors import (
    DimensionMismatchError,
    EnumerationLimitError,
    InternalInvariantError,
    InvalidInputError,
    PreconditionError,
    ResourceLimitError,
)
from app.models.channel import DMWiretapChannel, InputDistribution, MIBundle
from app.models.coding import (
    CodeConfig,
    Codebook,
    LeakageReport,
    NStatisticSummary,
    SimResult,
    SubcodebookLayout,
    Theorem3Bounds,
    TypicalityProbability,
)
from app.services.information import clamp_nonnegative, mi_bundle, seeded_rng
from app.services.logging import logging_service

COMPONENT = "simcode"

# 亂數流編號，搭配 (seed, stream, index)
_CODEBOOK_STREAM = 0
_TRIAL_STREAM = 1
_ENSEMBLE_STREAM = 2
_OBSERVATION_STREAM = 3

# 頻率比較的浮點容許誤差
_FREQ_SLACK = 1e-12

_ENUMERATION_CHUNK = 1 << 16

MessageTuple = Tuple[int, int, int, int]


def _check_setup(
    ch: DMWiretapChannel, px: Sequence[InputDistribution], max_alphabet: Optional[int] = None
) -> None:
    if ch.num_users != 2:
        raise PreconditionError("模擬器僅支援兩個使用者", {"users": ch.num_users})
    sizes = tuple(dist.size for dist in px)
    if sizes != ch.input_sizes:
        raise DimensionMismatchError(
            "輸入分佈大小與字母表不符", {"input_sizes": list(ch.input_sizes), "pmf_sizes": list(sizes)}
        )
    limit = settings.MAX_ALPHABET if max_alphabet is None else max_alphabet
    largest = max(*ch.input_sizes, ch.y_size, ch.z_size)
    if largest > limit:
        raise ResourceLimitError("字母表大小超過上限", {"largest": largest, "max": limit})


def _check_sequence(seq: Sequence[int], n: int, alphabet: int, label: str) -> np.ndarray:
    array = np.asarray(seq, dtype=np.int64).ravel()
    if array.size != n:
        raise DimensionMismatchError(f"{label} 長度必須為 {n}", {"length": int(array.size)})
    if array.size and (array.min() < 0 or array.max() >= alphabet):
        raise InvalidInputError(f"{label} 含有字母表外的符號", {"alphabet": alphabet})
    return array


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    """最後一軸的熵 (bits)"""
    safe = np.where(p > 0, p, 1.0)
    return -np.sum(np.where(p > 0, p * np.log2(safe), 0.0), axis=-1)


def _joint_pmf(px: Sequence[InputDistribution], conditional: np.ndarray) -> np.ndarray:
    """p(x1) p(x2) p(v|x1,x2)，形狀 (|X1|, |X2|, |V|)"""
    return px[0].pmf[:, None, None] * px[1].pmf[None, :, None] * conditional


def _pair_symbols(words1: np.ndarray, words2: np.ndarray, second_size: int) -> np.ndarray:
    """所有碼字對 (l1, l2) 逐位置的成對符號 x1·|X2| + x2，形狀 (B1·B2, n)"""
    n = words1.shape[1]
    return (words1[:, None, :] * second_size + words2[None, :, :]).reshape(-1, n)


def _typical_mask(symbols: np.ndarray, pmf: np.ndarray, eps: float) -> np.ndarray:
    """每一列序列是否對 pmf 為 robust 典型"""
    rows, n = symbols.shape
    counts = np.zeros((rows, pmf.size), dtype=np.int16)
    index = np.arange(rows)
    for i in range(n):
        counts[index, symbols[:, i]] += 1
    freq = counts / n
    return np.all(np.abs(freq - pmf) <= eps * pmf + _FREQ_SLACK, axis=1)


def typical_set_test(seq: Sequence[int], pmf: Sequence[float], eps: float) -> bool:
    """
    Robust 典型性：對每個符號 |freq(a) − p(a)| ≤ eps·p(a)，
    p(a) = 0 的符號不得出現
    """
    p = np.asarray(pmf, dtype=float).ravel()
    array = np.asarray(seq, dtype=np.int64).ravel()
    if array.size == 0:
        raise InvalidInputError("序列不可為空")
    array = _check_sequence(array, array.size, p.size, "序列")
    return bool(_typical_mask(array[None, :], p, eps)[0])


# 碼書與編碼


def _draw_codebook(
    cfg: CodeConfig, px: Sequence[InputDistribution], rng: np.random.Generator
) -> Codebook:
    layouts = cfg.layouts()
    words = tuple(
        rng.choice(dist.size, size=(layout.size, cfg.n), p=dist.pmf)
        for layout, dist in zip(layouts, px)
    )
    return Codebook(n=cfg.n, layouts=layouts, codewords=words, seed=cfg.seed, inputs=tuple(px))


def generate_codebooks(
    ch: DMWiretapChannel,
    px: Sequence[InputDistribution],
    cfg: CodeConfig,
    max_pairs: Optional[int] = None,
) -> Codebook:
    """
    產生兩使用者的隨機碼書，每個符號獨立取自 p(x_k)

    Raises:
        CodebookLimitError: Π_k |ℒ_k| 超過上限
    """
    _check_setup(ch, px)
    cfg.check_codebook_size(settings.MAX_CODEBOOK_PAIRS if max_pairs is None else max_pairs)
    codebook = _draw_codebook(cfg, px, seeded_rng(cfg.seed, _CODEBOOK_STREAM))
    logging_service.debug(
        COMPONENT,
        "Codebook generated",
        {"n": cfg.n, "seed": cfg.seed, "sizes": [layout.size for layout in codebook.layouts]},
    )
    return codebook


def encode(cb: Codebook, user: int, m: int, w: int, rng: np.random.Generator) -> int:
    """使用者 user (0 或 1) 在 bin 𝒞(m, w) 內均勻選取碼字索引"""
    if user not in (0, 1):
        raise InvalidInputError("使用者索引必須為 0 或 1", {"user": user})
    layout = cb.layouts[user]
    start = layout.index(m, w, 0)
    return start + int(rng.integers(layout.num_guard))


def _transmit(
    ch: DMWiretapChannel, x1: np.ndarray, x2: np.ndarray, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """逐符號依 p(y,z|x1,x2) 取樣"""
    rows = ch.transition[x1, x2].reshape(len(x1), -1)
    cdf = np.cumsum(rows, axis=1)
    draws = rng.random(len(x1))
    flat = np.minimum((draws[:, None] >= cdf).sum(axis=1), rows.shape[1] - 1)
    return flat // ch.z_size, flat % ch.z_size


class _Decoder:
    """預先計算所有碼字對的成對符號，供重複解碼使用"""

    def __init__(self, cb: Codebook, ch: DMWiretapChannel):
        if tuple(dist.size for dist in cb.inputs) != ch.input_sizes:
            raise DimensionMismatchError("碼書與通道的字母表不符", {"input_sizes": list(ch.input_sizes)})
        first, second = cb.layouts
        self.n = cb.n
        self.y_size = ch.y_size
        self.pairs = _pair_symbols(cb.codewords[0], cb.codewords[1], ch.input_sizes[1])
        self.pmf = _joint_pmf(cb.inputs, ch.main_channel()).ravel()
        self.second_messages = second.num_secret * second.num_open
        self.layouts = (first, second)
        bins1 = np.arange(first.size) // first.num_guard
        bins2 = np.arange(second.size) // second.num_guard
        self.keys = (bins1[:, None] * self.second_messages + bins2[None, :]).ravel()

    def __call__(self, y: np.ndarray, eps: float) -> Optional[MessageTuple]:
        mask = _typical_mask(self.pairs * self.y_size + y[None, :], self.pmf, eps)
        candidates = np.unique(self.keys[mask])
        if candidates.size != 1:
            return None
        first_bin, second_bin = divmod(int(candidates[0]), self.second_messages)
        m1, w1 = divmod(first_bin, self.layouts[0].num_open)
        m2, w2 = divmod(second_bin, self.layouts[1].num_open)
        return m1, w1, m2, w2


def decode(cb: Codebook, ch: DMWiretapChannel, y: Sequence[int], eps: float) -> Optional[MessageTuple]:
    """
    聯合典型解碼

    Returns:
        (m1, w1, m2, w2)；沒有或有多於一組訊息與 y^n 聯合典型時回傳 None
    """
    decoder = _Decoder(cb, ch)
    return decoder(_check_sequence(y, cb.n, ch.y_size, "y^n"), eps)


def _run_trial(decoder: _Decoder, cb: Codebook, ch: DMWiretapChannel, cfg: CodeConfig, trial: int) -> bool:
    """單次試驗，回傳是否解碼錯誤"""
    rng = seeded_rng(cfg.seed, _TRIAL_STREAM, trial)
    sent: List[int] = []
    words = []
    for user, layout in enumerate(cb.layouts):
        m = int(rng.integers(layout.num_secret))
        w = int(rng.integers(layout.num_open))
        sent.extend((m, w))
        words.append(cb.codeword(user, encode(cb, user, m, w, rng)))
    y, _ = _transmit(ch, words[0], words[1], rng)
    return decoder(y, cfg.eps) != tuple(sent)


def run_trials(
    ch: DMWiretapChannel,
    px: Sequence[InputDistribution],
    cfg: CodeConfig,
    trials: int,
    codebook: Optional[Codebook] = None,
    leakage: bool = True,
    n_samples: Optional[int] = None,
    workers: Optional[int] = None,
) -> SimResult:
    """
    以固定碼書執行 trials 次傳輸並彙整結果

    每次試驗的訊息、編碼亂數與通道雜訊取自亂數流 (seed, trial)，
    因此結果與 worker 數量無關。洩漏量列舉超過上限時 leakage 欄位為 None。
    """
    if trials < 1:
        raise PreconditionError("試驗次數必須至少為 1", {"trials": trials})
    cb = codebook if codebook is not None else generate_codebooks(ch, px, cfg)
    if cb.n != cfg.n:
        raise DimensionMismatchError("碼書區塊長度與設定不符", {"codebook": cb.n, "config": cfg.n})
    decoder = _Decoder(cb, ch)
    pool_size = settings.WORKERS if workers is None else workers

    if pool_size <= 1:
        errors = sum(_run_trial(decoder, cb, ch, cfg, t) for t in range(trials))
    else:
        with ThreadPoolExecutor(max_workers=pool_size) as executor:
            errors = sum(executor.map(lambda t: _run_trial(decoder, cb, ch, cfg, t), range(trials)))

    bounds = theorem3_bounds(mi_bundle(ch, px), cfg)
    report = None
    if leakage:
        try:
            report = exact_leakage(ch, cb)
        except EnumerationLimitError as exc:
            logging_service.warning(COMPONENT, "Leakage enumeration skipped", exc.details)

    samples = settings.N_STATISTIC_SAMPLES if n_samples is None else n_samples
    summary = _observe_fixed_codebook(cb, ch, cfg, samples) if samples > 0 else None
    margin = equivocation_bound_margin(report, bounds) if report is not None else None

    result = SimResult(
        seed=cfg.seed,
        n=cfg.n,
        trials=trials,
        errors=int(errors),
        error_probability=errors / trials,
        requested_rates=cfg.rates,
        effective_rates=cfg.effective_rates(),
        leakage=report,
        n_statistic=summary,
        bounds=bounds,
        equivocation_margin=margin,
    )
    logging_service.info(
        COMPONENT,
        "Simulation finished",
        {"seed": cfg.seed, "n": cfg.n, "trials": trials, "errors": int(errors),
         "leakage": report.rate if report else None},
    )
    return result


# 洩漏量


def _z_sequence_pmf(wz: np.ndarray, words1: np.ndarray, words2: np.ndarray) -> np.ndarray:
    """p(z^n | x1^n(l1), x2^n(l2))，形狀 (B1·B2, |Z|^n)，z_1 為最高位"""
    pairs = words1.shape[0] * words2.shape[0]
    probs = np.ones((pairs, 1))
    for i in range(words1.shape[1]):
        factor = wz[words1[:, i][:, None], words2[:, i][None, :]].reshape(pairs, -1)
        probs = (probs[:, :, None] * factor[:, None, :]).reshape(pairs, -1)
    return probs


def _block(cb: Codebook, user: int, m: int) -> np.ndarray:
    span = cb.layouts[user].subcodebook(m)
    return cb.codewords[user][span.start:span.stop]


def exact_leakage(ch: DMWiretapChannel, cb: Codebook, max_atoms: Optional[int] = None) -> LeakageReport:
    """
    固定碼書下以窮舉計算 I(M1,M2;Z^n)

    p(z^n|m1,m2) 為子碼書內所有 (l1,l2) 的平均。同時回報各使用者與子集的洩漏率、
    H(L|Z^n)、H(L|M,Z^n)、鏈式恆等式殘差與超可加性餘量。

    Raises:
        EnumerationLimitError: |Z|^n 乘上訊息組數或子碼書對數超過上限
    """
    limit = settings.MAX_LEAKAGE_ATOMS if max_atoms is None else max_atoms
    first, second = cb.layouts
    n = cb.n
    z_sequences = ch.z_size ** n
    tuples = first.num_secret * second.num_secret
    block = first.subcodebook_size * second.subcodebook_size
    atoms = z_sequences * max(tuples, block)
    if atoms > limit:
        raise EnumerationLimitError(
            "洩漏量列舉規模超過上限", {"atoms": atoms, "max": limit, "n": n, "z_size": ch.z_size}
        )
    tol = settings.MI_TOLERANCE
    wz = ch.eavesdropper_channel()

    p_z_m = np.zeros((first.num_secret, second.num_secret, z_sequences))
    h_joint_lz = 0.0
    codewords = first.size * second.size
    for m1 in range(first.num_secret):
        words1 = _block(cb, 0, m1)
        for m2 in range(second.num_secret):
            conditional = _z_sequence_pmf(wz, words1, _block(cb, 1, m2))
            p_z_m[m1, m2] = conditional.mean(axis=0)
            h_joint_lz += float(_entropy_rows((conditional / codewords).ravel()))

    p_z = p_z_m.mean(axis=(0, 1))
    total = float(p_z.sum())
    if abs(total - 1.0) > tol:
        raise InternalInvariantError("p(z^n) 總和不為 1", {"total": total})

    h_z = float(_entropy_rows(p_z))
    h_z_given_m = float(_entropy_rows(p_z_m).mean())
    h_z_given_m1 = float(_entropy_rows(p_z_m.mean(axis=1)).mean())
    h_z_given_m2 = float(_entropy_rows(p_z_m.mean(axis=0)).mean())
    h_joint_mz = float(_entropy_rows((p_z_m / tuples).ravel()))

    joint = clamp_nonnegative(h_z - h_z_given_m, tol, "I(M1,M2;Z^n)")
    per_user = (
        clamp_nonnegative(h_z - h_z_given_m1, tol, "I(M1;Z^n)"),
        clamp_nonnegative(h_z - h_z_given_m2, tol, "I(M2;Z^n)"),
    )
    message_entropy = math.log2(tuples)
    entropy_given_z = h_joint_lz - h_z
    entropy_given_mz = h_joint_lz - h_joint_mz
    residual = joint - (message_entropy - entropy_given_z + entropy_given_mz)
    margin = joint - sum(per_user)
    if margin < -tol:
        raise InternalInvariantError(
            "洩漏量不滿足超可加性", {"joint": joint, "per_user": list(per_user)}
        )

    report = LeakageReport(
        n=n,
        rate=joint / n,
        user_rates=tuple(value / n for value in per_user),
        subset_rates={"1": per_user[0] / n, "2": per_user[1] / n, "12": joint / n},
        mutual_information=joint,
        message_entropy=message_entropy,
        entropy_given_z=entropy_given_z,
        entropy_given_mz=entropy_given_mz,
        chain_residual=residual,
        superadditivity_margin=margin,
        total_probability=total,
    )
    logging_service.debug(
        COMPONENT, "Leakage enumerated", {"n": n, "atoms": atoms, "rate": report.rate}
    )
    return report


# N 統計量與其期望值、變異數上界


def _xz_pmf(inputs: Sequence[InputDistribution], ch: DMWiretapChannel) -> np.ndarray:
    return _joint_pmf(inputs, ch.eavesdropper_channel())


def n_statistic(
    cb: Codebook, ch: DMWiretapChannel, z: Sequence[int], m1: int, m2: int, eps: float
) -> Tuple[int, bool]:
    """
    N(m1, m2, z^n)：子碼書 ℒ_{1,m1} × ℒ_{2,m2} 中與 z^n 條件典型的碼字對數

    Returns:
        (count, z_typical)；z^n 對 p(z) 不典型時仍回傳計數並標記為 False
    """
    z = _check_sequence(z, cb.n, ch.z_size, "z^n")
    joint = _xz_pmf(cb.inputs, ch)
    z_typical = typical_set_test(z, joint.sum(axis=(0, 1)), eps)
    words1, words2 = _block(cb, 0, m1), _block(cb, 1, m2)
    symbols = _pair_symbols(words1, words2, ch.input_sizes[1]) * ch.z_size + z[None, :]
    count = int(_typical_mask(symbols, joint.ravel(), eps).sum())
    return count, z_typical


def _summarize(counts: List[int], flags: List[bool]) -> NStatisticSummary:
    values = np.asarray(counts, dtype=float)
    return NStatisticSummary(
        samples=len(counts),
        mean=float(values.mean()),
        variance=float(values.var()),
        typical_fraction=float(np.mean(flags)),
        maximum=int(values.max()),
    )


def _observe(
    cb: Codebook, ch: DMWiretapChannel, eps: float, rng: np.random.Generator, p_z: np.ndarray
) -> Tuple[int, bool]:
    m1 = int(rng.integers(cb.layouts[0].num_secret))
    m2 = int(rng.integers(cb.layouts[1].num_secret))
    z = rng.choice(ch.z_size, size=cb.n, p=p_z)
    return n_statistic(cb, ch, z, m1, m2, eps)


def _observe_fixed_codebook(
    cb: Codebook, ch: DMWiretapChannel, cfg: CodeConfig, samples: int
) -> NStatisticSummary:
    p_z = _xz_pmf(cb.inputs, ch).sum(axis=(0, 1))
    observations = [
        _observe(cb, ch, cfg.eps, seeded_rng(cfg.seed, _OBSERVATION_STREAM, s), p_z)
        for s in range(samples)
    ]
    return _summarize([c for c, _ in observations], [f for _, f in observations])


def sample_n_statistic(
    ch: DMWiretapChannel,
    px: Sequence[InputDistribution],
    cfg: CodeConfig,
    samples: Optional[int] = None,
) -> NStatisticSummary:
    """
    對碼書集合取樣 N：每個樣本使用亂數流 (seed, s) 產生新碼書、
    均勻訊息與 i.i.d. p(z) 的 z^n
    """
    count = settings.N_STATISTIC_SAMPLES if samples is None else samples
    if count < 1:
        raise PreconditionError("樣本數必須至少為 1", {"samples": count})
    _check_setup(ch, px)
    cfg.check_codebook_size(settings.MAX_CODEBOOK_PAIRS)
    p_z = _xz_pmf(px, ch).sum(axis=(0, 1))
    counts, flags = [], []
    for s in range(count):
        rng = seeded_rng(cfg.seed, _ENSEMBLE_STREAM, s)
        value, typical = _observe(_draw_codebook(cfg, px, rng), ch, cfg.eps, rng, p_z)
        counts.append(value)
        flags.append(typical)
    summary = _summarize(counts, flags)
    logging_service.debug(
        COMPONENT, "N statistic sampled", {"samples": count, "mean": summary.mean, "n": cfg.n}
    )
    return summary


def theorem3_bounds(mi: MIBundle, cfg: CodeConfig) -> Theorem3Bounds:
    """
    E[N] 與 Var[N] 的上界，以實際 (取整後) 速率計算

        Δ = Σ_k (Rko + Rkg) − I(X1,X2;Z)，Δk = Rko + Rkg − I(Xk;Z)，δ1 = 5ε
        E[N] ≤ 2^{n(Δ+δ1)}
        Var[N] ≤ 2^{n(Δ+δ1)} + Σ_k 2^{n(2Δ−Δk+δ1)}
        P{N ≥ 2^{n(Δ+δ1)+1}} ≤ 2^{−n(Δ+δ1)} + Σ_k 2^{−n(Δk+δ1)}
    """
    rates = cfg.effective_rates()
    n = cfg.n
    delta = sum(r.open + r.guard for r in rates) - float(mi.i_z((1, 2)))
    deltas = tuple(r.open + r.guard - float(mi.i_z(k)) for k, r in enumerate(rates, start=1))
    delta1 = 5.0 * cfg.eps
    mean_bound = 2.0 ** (n * (delta + delta1))
    return Theorem3Bounds(
        delta=delta,
        delta_users=deltas,
        delta1=delta1,
        mean_bound=mean_bound,
        var_bound=mean_bound + sum(2.0 ** (n * (2 * delta - dk + delta1)) for dk in deltas),
        tail_bound=2.0 ** (-n * (delta + delta1)) + sum(2.0 ** (-n * (dk + delta1)) for dk in deltas),
    )


def equivocation_bound_margin(report: LeakageReport, bounds: Theorem3Bounds) -> float:
    """(Δ + δ1) − (1/n) H(L1,L2|M1,M2,Z^n)；負值表示有限長度下超出上界"""
    return bounds.delta + bounds.delta1 - report.entropy_given_mz / report.n


def typicality_probability(
    ch: DMWiretapChannel,
    px: Sequence[InputDistribution],
    cfg: CodeConfig,
    z: Sequence[int],
    max_sequences: Optional[int] = None,
) -> TypicalityProbability:
    """
    p1 = P{(X1^n, X2^n) ∈ 𝒯_ε(X1,X2|z^n)}，(X1^n, X2^n) 為 i.i.d. 輸入

    以窮舉所有輸入序列對精確計算，並附上 2^{−n(I(X1,X2;Z)−5ε)} 與
    E[N] = |ℒ_{1,m1}|·|ℒ_{2,m2}|·p1。
    """
    _check_setup(ch, px)
    n = cfg.n
    z = _check_sequence(z, n, ch.z_size, "z^n")
    pair_size = ch.input_sizes[0] * ch.input_sizes[1]
    total = pair_size ** n
    limit = settings.MAX_TYPICALITY_ENUMERATION if max_sequences is None else max_sequences
    if total > limit:
        raise EnumerationLimitError("典型性列舉規模超過上限", {"sequences": total, "max": limit})

    pair_pmf = np.outer(px[0].pmf, px[1].pmf).ravel()
    joint = _xz_pmf(px, ch).ravel()
    powers = pair_size ** np.arange(n - 1, -1, -1)
    probability = 0.0
    for start in range(0, total, _ENUMERATION_CHUNK):
        index = np.arange(start, min(start + _ENUMERATION_CHUNK, total))
        digits = (index[:, None] // powers[None, :]) % pair_size
        mask = _typical_mask(digits * ch.z_size + z[None, :], joint, cfg.eps)
        probability += float(np.prod(pair_pmf[digits[mask]], axis=1).sum())

    mi = mi_bundle(ch, px)
    layouts: Tuple[SubcodebookLayout, ...] = cfg.layouts()
    return TypicalityProbability(
        probability=probability,
        bound=2.0 ** (-n * (float(mi.i_z((1, 2))) - 5.0 * cfg.eps)),
        expected_count=layouts[0].subcodebook_size * layouts[1].subcodebook_size * probability,
    )
