"""JSON game and profile files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List

from .game import ConcurrentGame, GameError, StrategyMachine, make_game

WILDCARD = "*"


class FormatError(GameError):
    pass


def _loads(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _require(doc, key, source):
    if key not in doc:
        raise FormatError(f"{source}: missing field {key!r}")
    return doc[key]


def game_from_dict(doc: dict, source: str = "<game>") -> ConcurrentGame:
    players = [str(p) for p in _require(doc, "players", source)]
    actions = [str(a) for a in _require(doc, "actions", source)]
    states = [str(s) for s in _require(doc, "states", source)]
    initial = str(_require(doc, "initial", source))
    weights = _require(doc, "weights", source)
    rules = _require(doc, "transitions", source)
    available = doc.get("available")
    if len(set(states)) != len(states):
        raise FormatError(f"{source}: duplicate state names")
    if initial not in states:
        raise FormatError(f"{source}: initial state {initial!r} not declared")
    for s in states:
        if s not in weights:
            raise FormatError(f"{source}: no weights for state {s!r}")
        for p in weights[s]:
            if p not in players:
                raise FormatError(f"{source}: weights of {s!r} mention unknown player {p!r}")
    for k, rule in enumerate(rules):
        for key in ("from", "moves", "to"):
            if key not in rule:
                raise FormatError(f"{source}: transition #{k} missing {key!r}")
        if rule["from"] != WILDCARD and rule["from"] not in states:
            raise FormatError(f"{source}: transition #{k} from unknown state {rule['from']!r}")
        if rule["to"] not in states:
            raise FormatError(f"{source}: transition #{k} to unknown state {rule['to']!r}")
        for p in rule["moves"]:
            if p not in players:
                raise FormatError(f"{source}: transition #{k} mentions unknown player {p!r}")
    if available:
        for s, per in available.items():
            if s not in states:
                raise FormatError(f"{source}: available actions for unknown state {s!r}")
            for p, acts in per.items():
                bad = [a for a in acts if a not in actions]
                if p not in players or bad:
                    raise FormatError(f"{source}: bad available entry for {s!r}/{p!r}")

    def transition(s, move):
        for rule in rules:
            if rule["from"] not in (WILDCARD, s):
                continue
            ok = all(a == WILDCARD or move[players.index(p)] == a for p, a in rule["moves"].items())
            if ok:
                return rule["to"]
        raise FormatError(f"{source}: no transition rule matches state {s!r} move {list(move)}"
                          " (a final catch-all rule is required)")

    return make_game(players, actions, states, initial,
                     {s: {p: int(v) for p, v in weights[s].items()} for s in states},
                     transition, available)


def load_game(path) -> ConcurrentGame:
    text = Path(path).read_text(encoding="utf-8")
    return game_from_dict(_loads(text, str(path)), str(path))


def game_to_dict(game: ConcurrentGame) -> dict:
    """Explicit encoding: one rule per (state, move), no wildcards."""
    doc = {
        "players": list(game.players),
        "actions": list(game.actions),
        "states": list(game.states),
        "initial": game.states[game.initial],
        "weights": {s: {p: game.weights[i][j] for j, p in enumerate(game.players)}
                    for i, s in enumerate(game.states)},
    }
    full = tuple(game.actions)
    avail = {}
    for i, s in enumerate(game.states):
        per = {p: list(a) for p, a in zip(game.players, game.available[i]) if tuple(a) != full}
        if per:
            avail[s] = per
    if avail:
        doc["available"] = avail
    rules = []
    for i, s in enumerate(game.states):
        for move, t in game.table[i].items():
            rules.append({"from": s, "moves": dict(zip(game.players, move)), "to": game.states[t]})
    doc["transitions"] = rules
    return doc


def games_equal(a: ConcurrentGame, b: ConcurrentGame) -> bool:
    """Equality up to state order, keyed by state names."""
    if (a.players, a.actions) != (b.players, b.actions) or set(a.states) != set(b.states):
        return False
    if a.states[a.initial] != b.states[b.initial]:
        return False
    for s in a.states:
        i, j = a.state_index[s], b.state_index[s]
        if a.weights[i] != b.weights[j] or a.available[i] != b.available[j]:
            return False
        if {m: a.states[t] for m, t in a.table[i].items()} != {m: b.states[t] for m, t in b.table[j].items()}:
            return False
    return True


def profile_from_dict(doc: dict, game: ConcurrentGame, source: str = "<profile>") -> StrategyMachine:
    """Read a full strategy profile; memory and state fields of update rules may be ``*``."""
    memory = [str(m) for m in _require(doc, "memory", source)]
    m0 = str(_require(doc, "initial_memory", source))
    if m0 not in memory:
        raise FormatError(f"{source}: initial memory {m0!r} not declared")
    output: Dict = {}
    for k, row in enumerate(_require(doc, "output", source)):
        m, s, mv = str(row["memory"]), str(row["state"]), row["move"]
        if s not in game.state_index:
            raise FormatError(f"{source}: output #{k} unknown state {s!r}")
        try:
            move = tuple(str(mv[p]) for p in game.players)
        except KeyError as exc:
            raise FormatError(f"{source}: output #{k} missing action for {exc.args[0]!r}") from None
        if move not in game.table[game.state_index[s]]:
            raise FormatError(f"{source}: output #{k} move {list(move)} illegal at {s!r}")
        output[(m, game.state_index[s])] = move
    for m in memory:
        for s in range(len(game.states)):
            if (m, s) not in output:
                raise FormatError(f"{source}: no output for memory {m!r} at state {game.states[s]!r}")
    rules: List[dict] = list(doc.get("update", []))
    update = {}
    for m in memory:
        for s_i, s in enumerate(game.states):
            for move in game.moves(s_i):
                for rule in rules:
                    if str(rule.get("memory", WILDCARD)) not in (WILDCARD, m):
                        continue
                    if str(rule.get("state", WILDCARD)) not in (WILDCARD, s):
                        continue
                    obs = rule.get("observed", {})
                    if all(a == WILDCARD or move[game.player_index[p]] == a for p, a in obs.items()):
                        nxt = str(rule["next_memory"])
                        if nxt not in memory:
                            raise FormatError(f"{source}: unknown memory {nxt!r}")
                        update[(m, s_i, move)] = nxt
                        break
    return StrategyMachine(tuple(range(game.n)), m0, output, update, default_stay=True)


def load_profile(path, game: ConcurrentGame) -> StrategyMachine:
    text = Path(path).read_text(encoding="utf-8")
    return profile_from_dict(_loads(text, str(path)), game, str(path))


def profile_to_dict(profile: StrategyMachine, game: ConcurrentGame) -> dict:
    mem = sorted({str(m) for m in profile.memory})
    out = [{"memory": str(m), "state": game.states[s], "move": dict(zip(game.players, mv))}
           for (m, s), mv in sorted(profile.output.items(), key=lambda kv: (str(kv[0][0]), kv[0][1]))]
    upd = [{"memory": str(m), "state": game.states[s], "observed": dict(zip(game.players, obs)),
            "next_memory": str(nxt)}
           for (m, s, obs), nxt in profile.update.items() if nxt != m]
    return {"memory": mem, "initial_memory": str(profile.initial_memory), "output": out, "update": upd}


def deviator_to_dict(dgame) -> dict:
    """The reachable deviator game in the game file format.

    Two players, Eve and Adam, whose actions are joint moves of the base game
    written ``a,b,...``; Eve proposes, Adam's move is the one played. States
    are named ``s@{A1,A3}``. Both players weigh 0; the base weights of each
    state are kept under ``base_weights``.
    """
    game = dgame.game
    states = dgame.explicit()
    name = {ds: dgame.state_name(ds) for ds in states}
    joint = lambda m: ",".join(m)
    actions = sorted({joint(m) for ds in states for m in game.moves(ds.state)})
    rules = []
    available = {}
    for ds in states:
        moves = [joint(m) for m in game.moves(ds.state)]
        if len(moves) != len(actions):
            available[name[ds]] = {"Eve": moves, "Adam": moves}
        for e, rs in dgame.responses(ds.state):
            for a, t, m in rs:
                rules.append({"from": name[ds], "moves": {"Eve": joint(e), "Adam": joint(a)},
                              "to": name[type(ds)(t, ds.devs | m)]})
    doc = {"players": ["Eve", "Adam"], "actions": actions, "states": [name[ds] for ds in states],
           "initial": name[dgame.initial],
           "weights": {name[ds]: {"Eve": 0, "Adam": 0} for ds in states}}
    if available:
        doc["available"] = available
    doc["transitions"] = rules
    doc["base_weights"] = {name[ds]: dict(zip(game.players, game.weights[ds.state])) for ds in states}
    return doc
