#!/usr/bin/env python3
"""Writes models/pkcs11-exp{1..5}.exthorntype and their scenario files.

exp1/exp2 use fixed key sets; exp3..exp5 add seeded random keys. Random keys
are sensitive and never carry both wrap and decrypt, so key 2 (exp1 layout)
stays the only way to recover key 1 in the scaled entries.
"""
import random
import sys
from pathlib import Path

ATTRS = ["extractable", "wrap", "unwrap", "encrypt", "decrypt", "sensitive"]
SEED = 20240611

HEADER = """\
import mocktoken

token = mocktoken.open_session()"""

FOOTER = "token.cleanup()"

RULES = """\
clause "wrap"
  storedkey(hw,vw,attrs(e1,true,u1,n1,d1,s1)) && storedkey(ht,vt,attrs(true,w2,u2,n2,d2,s2))
  => iknows(enc(vw,vt))
  (**| |enc(vw,vt)| = token.wrap(|hw|, |ht|) **).

clause "unwrap"
  storedkey(hu,vu,attrs(e,w,true,n,d,s)) && iknows(enc(vu,vn))
  && isbool(a1) && isbool(a2) && isbool(a3) && isbool(a4) && isbool(a5) && isbool(a6)
  => storedkey(nh[vn,a1,a2,a3,a4,a5,a6],vn,attrs(a1,a2,a3,a4,a5,a6))
  (**| |nh[vn,a1,a2,a3,a4,a5,a6]| = token.unwrap(|hu|, |enc(vu,vn)|, |attrs(a1,a2,a3,a4,a5,a6)|) **).

clause "encrypt"
  storedkey(h,v,attrs(e,w,u,true,d,s)) && iknows(m)
  => iknows(enc(v,m))
  (**| |enc(v,m)| = token.encrypt(|h|, |m|) **).

clause "decrypt"
  storedkey(h,v,attrs(e,w,u,n,true,s)) && iknows(enc(v,m))
  => iknows(m)
  (**| |m| = token.decrypt(|h|, |enc(v,m)|); mocktoken.report(|m|) **).

clause "generate"
  isbool(a1) && isbool(a2) && isbool(a3) && isbool(a4) && isbool(a5) && isbool(a6)
  => storedkey(gh[a1,a2,a3,a4,a5,a6],gv[a1,a2,a3,a4,a5,a6],attrs(a1,a2,a3,a4,a5,a6))
  (**| |gh[a1,a2,a3,a4,a5,a6]| = token.generate_key(|attrs(a1,a2,a3,a4,a5,a6)|) **).

clause "read value"
  storedkey(h,v,attrs(e,w,u,n,d,false))
  => iknows(v)
  (**| |v| = token.get_value(|h|) **).

clause "offline decrypt"
  iknows(enc(k,m)) && iknows(k)
  => iknows(m)
  (**| |m| = mocktoken.decrypt_offline(|k|, |enc(k,m)|); mocktoken.report(|m|) **).
"""


def flags_of(attrs):
    return [a for a in ATTRS if a in attrs]


def random_key(rng):
    while True:
        chosen = {a for a in ATTRS[:5] if rng.random() < 0.5}
        if not {"wrap", "decrypt"} <= chosen:
            return chosen | {"sensitive"}


def model_text(title, keys, known):
    b = lambda x: "true" if x else "false"
    out = [f"// {title}", "", "header (**", HEADER, "**)", ""]
    out += ["type value.", "type handle.", "type bool.", "type attributes.", ""]
    for kid, _ in keys:
        out.append(f"name key{kid}[]: value.")
    out.append("name nh[value,bool,bool,bool,bool,bool,bool]: handle.")
    out.append("name gh[bool,bool,bool,bool,bool,bool]: handle.")
    out.append("name gv[bool,bool,bool,bool,bool,bool]: value.")
    out.append("")
    out.append("fun enc(value,value): value.")
    out.append("fun attrs(bool,bool,bool,bool,bool,bool): attributes")
    out.append("  (**| mocktoken.Attrs(extractable=|1|, wrap=|2|, unwrap=|3|, encrypt=|4|, decrypt=|5|, sensitive=|6|) **).")
    out.append("fun true: bool (**| True **).")
    out.append("fun false: bool (**| False **).")
    for kid, _ in keys:
        out.append(f"fun hnd{kid}: handle (**| token.handle({kid}) **).")
    for kid in known:
        out.append(f"fun known{kid}: value (**| token.known_value({kid}) **).")
    out.append("")
    out += ["pred iknows(value).", "pred storedkey(handle,value,attributes).", "pred isbool(bool).", ""]
    out.append(RULES)
    out.append("// initial state")
    out.append('clause "bool true" => isbool(true).')
    out.append('clause "bool false" => isbool(false).')
    for kid, attrs in keys:
        args = ",".join(b(a in attrs) for a in ATTRS)
        out.append(f'clause "stored key{kid}" => storedkey(hnd{kid},key{kid}[],attrs({args})).')
    for kid in known:
        out.append(f'clause "known key{kid}" => iknows(known{kid}).')
    out += ["", "query iknows(key1[]).", "", "footer (**", FOOTER, "**)", ""]
    return "\n".join(out)


def scenario_text(keys, known):
    out = ["mode pkcs11"]
    for kid, attrs in keys:
        out.append(f"key {kid} aeskey {100 + kid} {','.join(flags_of(attrs)) or '-'}")
    for kid in known:
        out.append(f"known {kid} aeskey {100 + kid}")
    return "\n".join(out) + "\n"


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "models"
    rng = random.Random(SEED)
    k1 = {"extractable", "sensitive"}
    exp1 = [(1, k1), (2, {"wrap", "decrypt", "sensitive"})]
    exp2 = [(1, k1), (2, {"encrypt", "unwrap", "sensitive"})]
    entries = {
        "pkcs11-exp1": ("wrap/decrypt key", exp1),
        "pkcs11-exp2": ("encrypt/unwrap key", exp2),
    }
    for n, count in ((3, 4), (4, 6), (5, 12)):
        keys = list(exp1) + [(i, random_key(rng)) for i in range(3, count + 1)]
        # key 3 is the attacker's known key, so stored ids skip it
        keys = [(kid if kid < 3 else kid + 1, a) for kid, a in keys]
        entries[f"pkcs11-exp{n}"] = (f"{count} stored keys", keys)
    for name, (title, keys) in entries.items():
        (root / f"{name}.exthorntype").write_text(model_text(f"Mini PKCS#11 token, {title}.", keys, [3]))
        (root / f"{name}.scenario").write_text(scenario_text(keys, [3]))


if __name__ == "__main__":
    main()
