"""Write the loghub-format fixtures under tests/data/.

The real loghub-2k files are not vendored here. These stand-ins follow the
same CSV layout (LineId, Level, Content, EventId, EventTemplate) and are
generated from a fixed seed, so rerunning this script reproduces them byte
for byte. The Apache file uses the six Apache event templates; the Mixed file
draws from message types seen across HDFS, OpenSSH, Zookeeper, Spark, Linux,
HPC and BGL logs.
"""

import csv
import random
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data"


class Gen:
    def __init__(self, seed):
        self.r = random.Random(seed)

    def i(self, lo, hi):
        return str(self.r.randint(lo, hi))

    def ip(self):
        return f"10.{self.r.randint(0, 255)}.{self.r.randint(0, 255)}.{self.r.randint(1, 254)}"

    def pub_ip(self):
        return f"{self.r.randint(60, 223)}.{self.r.randint(0, 255)}.{self.r.randint(0, 255)}.{self.r.randint(1, 254)}"

    def ipport(self):
        return f"{self.ip()}:{self.r.randint(1024, 65535)}"

    def blk(self):
        return f"blk_{self.r.choice(['', '-'])}{self.r.randint(10**17, 10**19 - 1)}"

    def hexid(self, n=16):
        return "0x" + "".join(self.r.choice("0123456789abcdef") for _ in range(n))

    def user(self):
        return self.r.choice(["admin", "oracle", "test", "guest", "postgres", "user1", "support", "webmaster"])

    def host(self):
        return self.r.choice(["ns.example.net", "dsl-static.isp.org", "host-{}.cable.net".format(self.r.randint(1, 999))])

    def when(self):
        day = self.r.choice(["Sun", "Mon", "Tue", "Wed"])
        return f"{day} Jul {self.r.randint(10, 28)} {self.r.randint(0, 23):02d}:{self.r.randint(0, 59):02d}:{self.r.randint(0, 59):02d} 2005"

    def pick(self, *xs):
        return self.r.choice(xs)


APACHE = [
    # (event id, template, level, weight, filler)
    ("E1", "jk2_init() Found child <*> in scoreboard slot <*>", "notice", 836,
     lambda g: [g.i(1000, 9999), g.i(6, 10)]),
    ("E2", "workerEnv.init() ok <*>", "notice", 569,
     lambda g: ["/etc/httpd/conf/workers2.properties"]),
    ("E3", "mod_jk child workerEnv in error state <*>", "error", 539,
     lambda g: [g.i(6, 10)]),
    ("E4", "[client <*>] Directory index forbidden by rule: <*>", "error", 32,
     lambda g: [g.pub_ip(), "/var/www/html/"]),
    ("E5", "jk2_init() Can't find child <*> in scoreboard", "error", 12,
     lambda g: [g.i(1000, 9999)]),
    ("E6", "mod_jk child init <*> <*>", "error", 12,
     lambda g: [g.i(1, 2), "-" + g.i(1, 2)]),
]

MIXED = [
    ("M01", "Receiving block <*> src: <*> dest: <*>", lambda g: [g.blk(), "/" + g.ipport(), "/" + g.ipport()]),
    ("M02", "PacketResponder <*> for block <*> terminating", lambda g: [g.i(0, 2), g.blk()]),
    ("M03", "Received block <*> of size <*> from <*>", lambda g: [g.blk(), g.i(1000, 67108864), "/" + g.ip()]),
    ("M04", "BLOCK* NameSystem.addStoredBlock: blockMap updated: <*> is added to <*> size <*>",
     lambda g: [g.ipport(), g.blk(), g.i(1000, 67108864)]),
    ("M05", "BLOCK* NameSystem.allocateBlock: <*> <*>",
     lambda g: [f"/user/root/rand/_temporary/_task_{g.i(100000, 999999)}_m_{g.i(0, 999):0>6}_0/part-{g.i(0, 999):0>5}", g.blk()]),
    ("M06", "Verification succeeded for <*>", lambda g: [g.blk()]),
    ("M07", "Deleting block <*> file <*>", lambda g: [g.blk(), f"/mnt/hadoop/dfs/data/current/subdir{g.i(0, 63)}/{g.blk()}"]),
    ("M08", "<*> Served block <*> to <*>", lambda g: [g.ipport(), g.blk(), "/" + g.ip()]),
    ("M09", "BLOCK* ask <*> to delete <*>", lambda g: [g.ipport(), " ".join(g.blk() for _ in range(g.r.randint(1, 3)))]),
    ("M10", "Failed password for invalid user <*> from <*> port <*> ssh2", lambda g: [g.user(), g.pub_ip(), g.i(1024, 65535)]),
    ("M11", "pam_unix(sshd:auth): authentication failure; logname= uid=0 euid=0 tty=ssh ruser= rhost=<*>",
     lambda g: [g.pub_ip()]),
    ("M12", "Received disconnect from <*>: 11: Bye Bye [preauth]", lambda g: [g.pub_ip()]),
    ("M13", "Invalid user <*> from <*>", lambda g: [g.user(), g.pub_ip()]),
    ("M14", "input_userauth_request: invalid user <*> [preauth]", lambda g: [g.user()]),
    ("M15", "Connection closed by <*> [preauth]", lambda g: [g.pub_ip()]),
    ("M16", "reverse mapping checking getaddrinfo for <*> [<*>] failed - POSSIBLE BREAK-IN ATTEMPT!",
     lambda g: [g.host(), g.pub_ip()]),
    ("M17", "Accepted socket connection from /<*>:<*>", lambda g: [g.ip(), g.i(30000, 60000)]),
    ("M18", "Closed socket connection for client /<*>:<*> which had sessionid <*>",
     lambda g: [g.ip(), g.i(30000, 60000), g.hexid()]),
    ("M19", "Expiring session <*>, timeout of <*>ms exceeded", lambda g: [g.hexid(), g.pick("10000", "20000", "30000")]),
    ("M20", "Established session <*> with negotiated timeout <*> for client /<*>:<*>",
     lambda g: [g.hexid(), g.pick("10000", "20000"), g.ip(), g.i(30000, 60000)]),
    ("M21", "Client attempting to establish new session at /<*>:<*>", lambda g: [g.ip(), g.i(30000, 60000)]),
    ("M22", "Connection request from old client /<*>:<*>; will be dropped if server is in r-o mode",
     lambda g: [g.ip(), g.i(30000, 60000)]),
    ("M23", "Got assigned task <*>", lambda g: [g.i(0, 9999)]),
    ("M24", "Running task <*> in stage <*> (TID <*>)", lambda g: [g.i(0, 40) + ".0", g.i(0, 30) + ".0", g.i(0, 9999)]),
    ("M25", "Finished task <*> in stage <*> (TID <*>). <*> bytes result sent to driver",
     lambda g: [g.i(0, 40) + ".0", g.i(0, 30) + ".0", g.i(0, 9999), g.i(800, 3000)]),
    ("M26", "Block <*> stored as bytes in memory (estimated size <*>, free <*>)",
     lambda g: [f"broadcast_{g.i(0, 40)}_piece0", f"{g.i(1, 99)}.{g.i(0, 9)} KB", f"{g.i(1, 999)}.{g.i(0, 9)} MB"]),
    ("M27", "Found block <*> locally", lambda g: [f"rdd_{g.i(0, 40)}_{g.i(0, 40)}"]),
    ("M28", "Started reading broadcast variable <*>", lambda g: [g.i(0, 99)]),
    ("M29", "Reading broadcast variable <*> took <*> ms", lambda g: [g.i(0, 99), g.i(1, 400)]),
    ("M30", "Putting block <*> with replication factor <*> to memory", lambda g: [f"rdd_{g.i(0, 40)}_{g.i(0, 40)}", g.i(1, 3)]),
    ("M31", "session opened for user <*> by (uid=<*>)", lambda g: [g.pick("root", "cyrus", "news"), g.i(0, 99)]),
    ("M32", "session closed for user <*>", lambda g: [g.pick("root", "cyrus", "news")]),
    ("M33", "authentication failure; logname= uid=<*> euid=<*> tty=<*> ruser= rhost=<*>",
     lambda g: [g.i(0, 0), g.i(0, 0), g.pick("NODEVssh", "ssh"), g.host()]),
    ("M34", "connection from <*> (<*>) at <*>", lambda g: [g.pub_ip(), g.host(), g.when()]),
    ("M35", "ALERT exited abnormally with [<*>]", lambda g: [g.i(1, 9)]),
    ("M36", "check pass; user unknown", lambda g: []),
    ("M37", "Kerberos authentication failed", lambda g: []),
    ("M38", "FTP session closed", lambda g: []),
    ("M39", "Loaded Servicing Stack <*> with Core: <*>",
     lambda g: [f"v6.1.7601.{g.i(17000, 23000)}", f"C:\\Windows\\winsxs\\amd64_microsoft-windows-servicingstack_{g.hexid(8)}\\cbscore.dll"]),
    ("M40", "Session: <*> initialized by client <*>, version: <*>",
     lambda g: [f"{g.i(30000000, 30999999)}_{g.i(1000000000, 4000000000)}", g.pick("WindowsUpdateAgent", "DWM"), "7.0.7601.16385"]),
    ("M41", "Warning: Unrecognized packageExtended attribute.", lambda g: []),
    ("M42", "node-<*> has detected an available network connection on network <*> via interface <*>",
     lambda g: [g.i(0, 255), g.ip(), g.pick("alt0", "scip0")]),
    ("M43", "PBS_Batch: Job <*> failed: <*>",
     lambda g: [g.i(10000, 99999), g.pick("walltime exceeded", "node down", "out of memory limit", "killed")]),
    ("M44", "Unable to locate package <*>", lambda g: [g.pick("libssl-dev", "python3-pip", "gcc-12")]),
    ("M45", "ciod: failed to read message prefix on control stream (CioStream socket to <*>)", lambda g: [g.ipport()]),
    ("M46", "instruction cache parity error corrected", lambda g: []),
    ("M47", "generating core.<*>", lambda g: [g.i(100, 9999)]),
    ("M48", "<*> double-hummer alignment exceptions", lambda g: [g.i(1, 999)]),
]


def fill(template, values):
    out = template
    for v in values:
        out = out.replace("<*>", v, 1)
    return out


def write(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["LineId", "Level", "Content", "EventId", "EventTemplate"])
        w.writerows(rows)


def apache(n=2000):
    g = Gen(20051204)
    bag = [i for i, spec in enumerate(APACHE) for _ in range(spec[3])]
    assert len(bag) == n
    g.r.shuffle(bag)
    rows = []
    for line_id, idx in enumerate(bag, 1):
        eid, tpl, level, _, filler = APACHE[idx]
        rows.append([line_id, level, fill(tpl, filler(g)), eid, tpl])
    return rows


def mixed(n=2000):
    g = Gen(4242)
    order = list(range(len(MIXED)))
    g.r.shuffle(order)
    weights = [g.r.randint(1, 30) for _ in MIXED]
    while len(order) < n:
        order.append(g.r.choices(range(len(MIXED)), weights)[0])
    rows = []
    for line_id, idx in enumerate(order, 1):
        eid, tpl, filler = MIXED[idx]
        rows.append([line_id, "INFO", fill(tpl, filler(g)), eid, tpl])
    return rows


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, rows in (("Apache_2k", apache()), ("Mixed_2k", mixed())):
        write(OUT / f"{name}.log_structured.csv", rows)
        (OUT / f"{name}.log").write_text("".join(r[2] + "\n" for r in rows), encoding="utf-8")
        print(f"{name}: {len(rows)} rows, {len({r[4] for r in rows})} templates", file=sys.stderr)


if __name__ == "__main__":
    main()
