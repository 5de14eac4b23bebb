import json
from typing import Any, Callable, Dict, TextIO


def send_json_line(fp: TextIO, msg: Dict[str, Any]) -> None:
    fp.write(json.dumps(msg, separators=(",", ":"), ensure_ascii=False) + "\n")
    fp.flush()


def read_json_lines(fp: TextIO, on_msg: Callable[[Dict[str, Any]], None]) -> int:
    """Feed every decodable line of ``fp`` to ``on_msg``; returns how many were delivered."""
    delivered = 0
    for line in fp:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            continue
        on_msg(msg)
        delivered += 1
    return delivered
