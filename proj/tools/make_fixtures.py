#!/usr/bin/env python3
"""Regenerates the small hand-built event logs under data/fixtures/."""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixtures"
T0 = 1_700_000_000_000


class Log:
    def __init__(self):
        self.records = []

    def add(self, kind, payload, ts=None):
        seq = len(self.records) + 1
        self.records.append({"seq": seq, "ts": ts if ts is not None else T0 + seq * 60_000,
                             "kind": kind, "payload": payload})
        return seq

    def post(self, channel, author, act, parent=None, mode=None, body="..."):
        p = {"channel": channel, "author": author, "act": act, "body": body}
        if parent is not None:
            p["parent"] = parent
        if mode is not None:
            p["mode"] = mode
        return self.add("intervention_posted", p)

    def write(self, name):
        lines = [json.dumps({"format": "1", "kind": "log_meta"}, sort_keys=True, separators=(",", ":"))]
        lines += [json.dumps(r, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
                  for r in self.records]
        (OUT / name).write_text("\n".join(lines) + "\n", encoding="utf-8")


def mailgroup():
    log = Log()
    log.add("channel_created", {"channel": "mailgroup", "mode": "forum"})
    q = log.post("mailgroup", "a", "demander", body="Qui a le corrigé ?")
    log.post("mailgroup", "a", "preciser", parent=q, body="Celui de la partie 1.")
    r = log.post("mailgroup", "b", "repondre", parent=q, body="Moi.")
    log.post("mailgroup", "a", "questionner", parent=r, body="Tu peux le poster ?")
    log.write("mailgroup.events.jsonl")


def profiles():
    log = Log()
    log.add("channel_created", {"channel": "atelier", "mode": "forum"})
    props = [log.post("atelier", "u_anim", "proposer") for _ in range(4)]
    for _ in range(2):
        log.post("atelier", "u_anim", "affirmer")
    for p in props[:2]:
        log.post("atelier", "u_anim", "approuver", parent=p)
    for _ in range(4):
        log.post("atelier", "u_quet", "demander")
    log.add("presence_changed", {"user": "u_zero", "state": "connected"})
    log.write("profiles.events.jsonl")


def usage():
    log = Log()
    log.add("channel_created", {"channel": "cours", "mode": "forum"})
    ids = [log.post("cours", "u%d" % (i % 3), "affirmer", mode="contextual" if i < 15 else "global")
           for i in range(17)]
    for i in range(11):
        log.add("message_opened", {"user": "lecteur", "message": ids[i],
                                   "mode": "contextual" if i < 9 else "global"})
    log.write("usage.events.jsonl")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    mailgroup()
    profiles()
    usage()
