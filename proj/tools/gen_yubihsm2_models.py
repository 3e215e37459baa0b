#!/usr/bin/env python3
"""Writes models/yubihsm2-exp{1..7}.exthorntype and their scenario files."""
import random
import sys
from pathlib import Path

CAPS = ["export-wrapped", "import-wrapped", "exportable-under-wrap", "put-wrap-key", "generate-wrap-key"]
EW, IW, EUW, PWK, GWK = CAPS
ALL = set(CAPS)
SEED = 20240612

HEADER = """\
import mocktoken

token = mocktoken.open_session()"""

FOOTER = "token.cleanup()"


def caps_term(prefix):
    return "caps(" + ",".join(f"{prefix}{i}" for i in range(1, 6)) + ")"


def le(a, b):
    return " && ".join(f"le({a}{i},{b}{i})" for i in range(1, 6))


def isbools(prefix):
    return " && ".join(f"isbool({prefix}{i})" for i in range(1, 6))


CD = "c1,c2,c3,c4,c5,d1,d2,d3,d4,d5"

RULES = f"""\
clause "export wrapped"
  iauth(k(ai,av,authkey,caps(true,s2,s3,s4,s5),sd))
  && storedkey(k(wi,wv,wrapkey,caps(true,w2,w3,w4,w5),{caps_term('e')}))
  && storedkey(k(ti,tv,tt,caps(t1,t2,true,t4,t5),td))
  && le(t1,e1) && le(t2,e2) && le(true,e3) && le(t4,e4) && le(t5,e5)
  => iblob(wrap(wv,k(ti,tv,tt,caps(t1,t2,true,t4,t5),td)))
  (**| |wrap(wv,k(ti,tv,tt,caps(t1,t2,true,t4,t5),td))| = token.export_wrapped(|wi|, |ti|) **).

clause "import wrapped"
  iauth(k(ai,av,authkey,caps(s1,true,s3,s4,s5),sd))
  && storedkey(k(wi,wv,wrapkey,caps(w1,true,w3,w4,w5),{caps_term('e')}))
  && iblob(wrap(wv,k(ti,tv,tt,{caps_term('c')},{caps_term('d')})))
  && {le('c', 'e')} && {le('d', 'e')}
  => storedkey(k(ti,tv,tt,{caps_term('c')},{caps_term('d')}))
  (**| token.import_wrapped(|wi|, |wrap(wv,k(ti,tv,tt,{caps_term('c')},{caps_term('d')}))|) **).

clause "put wrapkey"
  iauth(k(ai,av,authkey,caps(s1,s2,s3,true,s5),{caps_term('e')}))
  && iknows(v) && {isbools('c')} && {isbools('d')}
  && {le('c', 'e')} && {le('d', 'e')}
  => storedkey(k(pid[v,{CD}],v,wrapkey,{caps_term('c')},{caps_term('d')}))
  (**| |pid[v,{CD}]| = token.put_wrap_key(|v|, |{caps_term('c')}|, |{caps_term('d')}|) **).

clause "generate wrapkey"
  iauth(k(ai,av,authkey,caps(s1,s2,s3,s4,true),{caps_term('e')}))
  && {isbools('c')} && {isbools('d')}
  && {le('c', 'e')} && {le('d', 'e')}
  => storedkey(k(gid[{CD}],gv[{CD}],wrapkey,{caps_term('c')},{caps_term('d')}))
  (**| |gid[{CD}]| = token.generate_wrap_key(|{caps_term('c')}|, |{caps_term('d')}|) **).

clause "encrypt data"
  storedkey(k(i,v,aeskey,c,d)) && iknows(m)
  => iblob(enc(v,m))
  (**| |enc(v,m)| = token.encrypt(|i|, |m|) **).

clause "decrypt data"
  storedkey(k(i,v,aeskey,c,d)) && iblob(enc(v,m))
  => iknows(m)
  (**| |m| = token.decrypt(|i|, |enc(v,m)|); mocktoken.report(|m|) **).

clause "attacker keygen"
  => ownkey(ak[])
  (**| |ak[]| = mocktoken.attacker_key(1) **).

clause "own key" ownkey(v) => iknows(v).

clause "craft wrap"
  iknows(wv) && ownkey(v) && {isbools('c')} && {isbools('d')}
  => iblob(wrap(wv,k(aid[v,{CD}],v,wrapkey,{caps_term('c')},{caps_term('d')})))
  (**| |aid[v,{CD}]| = token.fresh_id(); |wrap(wv,k(aid[v,{CD}],v,wrapkey,{caps_term('c')},{caps_term('d')}))| = mocktoken.craft_wrap(|wv|, |aid[v,{CD}]|, |v|, |wrapkey|, |{caps_term('c')}|, |{caps_term('d')}|) **).

clause "open wrap"
  iblob(wrap(wv,k(ti,tv,tt,c,d))) && iknows(wv)
  => iknows(tv)
  (**| |tv| = mocktoken.open_wrap(|wv|, |wrap(wv,k(ti,tv,tt,c,d))|); mocktoken.report(|tv|) **).
"""


def b(x):
    return "true" if x else "false"


def caps_value(s):
    return "caps(" + ",".join(b(c in s) for c in CAPS) + ")"


class Key:
    def __init__(self, kid, ktype, caps, dcaps=frozenset(), known=False, stored=True):
        self.kid, self.ktype, self.caps, self.dcaps = kid, ktype, set(caps), set(dcaps)
        self.known, self.stored = known, stored

    def value(self):
        return f"known{self.kid}" if self.known else f"key{self.kid}[]"


def model_text(title, keys, session_id):
    out = [f"// {title}", "", "header (**", HEADER, "**)", ""]
    out += [f"type {t}." for t in ("value", "blob", "key", "id", "ktype", "bool", "capset")]
    out.append("")
    for k in keys:
        if not k.known:
            out.append(f"name key{k.kid}[]: value.")
    out.append("name ak[]: value.")
    b10 = ",".join(["bool"] * 10)
    out.append(f"name aid[value,{b10}]: id.")
    out.append(f"name pid[value,{b10}]: id.")
    out.append(f"name gid[{b10}]: id.")
    out.append(f"name gv[{b10}]: value.")
    out.append("")
    out.append("fun k(id,value,ktype,capset,capset): key.")
    out.append("fun wrap(value,key): blob.")
    out.append("fun enc(value,value): blob.")
    out.append("fun caps(bool,bool,bool,bool,bool): capset")
    out.append("  (**| mocktoken.Caps(export_wrapped=|1|, import_wrapped=|2|, exportable_under_wrap=|3|, "
               "put_wrap_key=|4|, generate_wrap_key=|5|) **).")
    out.append("fun true: bool (**| True **).")
    out.append("fun false: bool (**| False **).")
    for t in ("authkey", "wrapkey", "aeskey", "hmackey"):
        out.append(f'fun {t}: ktype (**| "{t}" **).')
    for k in keys:
        if k.stored:
            out.append(f"fun id{k.kid}: id (**| {k.kid} **).")
    for k in keys:
        if k.known:
            out.append(f"fun known{k.kid}: value (**| token.known_value({k.kid}) **).")
    out.append("")
    out += ["pred iknows(value).", "pred iblob(blob).", "pred ownkey(value).", "pred storedkey(key).",
            "pred iauth(key).", "pred isbool(bool).", "pred le(bool,bool).", ""]
    out.append(RULES)
    out.append("// initial state")
    out.append('clause "bool true" => isbool(true).')
    out.append('clause "bool false" => isbool(false).')
    out.append('clause "le ff" => le(false,false).')
    out.append('clause "le ft" => le(false,true).')
    out.append('clause "le tt" => le(true,true).')
    for k in keys:
        term = f"k(id{k.kid},{k.value()},{k.ktype},{caps_value(k.caps)},{caps_value(k.dcaps)})"
        if k.kid == session_id:
            out.append(f'clause "session" => iauth({term}).')
        if k.stored:
            out.append(f'clause "stored key{k.kid}" => storedkey({term}).')
    for k in keys:
        if k.known:
            out.append(f'clause "known key{k.kid}" => iknows(known{k.kid}).')
    out += ["", "query iknows(key2[]).", "", "footer (**", FOOTER, "**)", ""]
    return "\n".join(out)


def scenario_text(keys, session_id):
    out = ["mode yubihsm2", f"session {session_id}"]
    for k in keys:
        if k.stored:
            flags = [f"cap:{c}" for c in CAPS if c in k.caps] + [f"dcap:{c}" for c in CAPS if c in k.dcaps]
            out.append(f"key {k.kid} {k.ktype} {100 + k.kid} {','.join(flags) or '-'}")
    for k in keys:
        if k.known:
            out.append(f"known {k.kid} {k.ktype} {100 + k.kid}")
    return "\n".join(out) + "\n"


def base(session_caps, session_dcaps, k3):
    return [Key(1, "authkey", session_caps, session_dcaps), Key(2, "aeskey", {EUW}), k3]


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "models"
    rng = random.Random(SEED)
    limited = {EW, IW}
    entries = {
        "yubihsm2-exp1": ("k3 exports, full delegated set", base(limited, ALL, Key(3, "wrapkey", {EW}, ALL, known=True))),
        "yubihsm2-exp2": ("k3 exports, delegates exportable-under-wrap",
                          base(limited, ALL, Key(3, "wrapkey", {EW}, {EUW}, known=True))),
        "yubihsm2-exp3": ("k3 imports only", base(limited, ALL, Key(3, "wrapkey", {IW}, ALL, known=True))),
        "yubihsm2-exp4": ("exp2 with put-wrap-key session",
                          base(limited | {PWK}, {EUW}, Key(3, "wrapkey", {EW}, {EUW}, known=True))),
        "yubihsm2-exp5": ("exp3 with put-wrap-key session",
                          base(limited | {PWK}, {EUW}, Key(3, "wrapkey", {IW}, ALL, known=True))),
        "yubihsm2-exp6": ("full session, k3 known but not stored",
                          base(ALL, ALL, Key(3, "wrapkey", {EW}, ALL, known=True, stored=False))),
    }
    exp7 = base(limited, ALL, Key(3, "wrapkey", {EW}, ALL, known=True))
    for kid in range(4, 14):
        ktype = rng.choice(["aeskey", "hmackey", "wrapkey", "authkey"])
        caps = {c for c in CAPS if c != EUW and rng.random() < 0.5}
        dcaps = {c for c in CAPS if rng.random() < 0.5} if ktype in ("wrapkey", "authkey") else set()
        exp7.append(Key(kid, ktype, caps, dcaps))
    entries["yubihsm2-exp7"] = ("exp1 with ten more keys", exp7)
    for name, (title, keys) in entries.items():
        (root / f"{name}.exthorntype").write_text(model_text(f"Mini YubiHSM2, {title}.", keys, 1))
        (root / f"{name}.scenario").write_text(scenario_text(keys, 1))


if __name__ == "__main__":
    main()
