//! Memory figures reported by the operating system, where it reports any.

use std::fs;

fn kib_field(text: &str, key: &str) -> Option<u64> {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(':'))
        .and_then(|rest| {
            let mut it = rest.split_whitespace();
            let v: u64 = it.next()?.parse().ok()?;
            match it.next() {
                Some("kB") | None => Some(v * 1024),
                _ => None,
            }
        })
}

/// Peak resident set size of this process in bytes (`VmHWM`).
pub fn peak_process_bytes() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    kib_field(&status, "VmHWM").or_else(|| kib_field(&status, "VmRSS"))
}

/// Physical memory of this machine in bytes (`MemTotal`).
pub fn total_memory_bytes() -> Option<u64> {
    kib_field(&fs::read_to_string("/proc/meminfo").ok()?, "MemTotal")
}
