use std::io::Write;

fn main() {
    if let Some(n) = std::env::var("OPTRISK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // ignore failure: the pool may already be initialised
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let code = optrisk::cli::run(std::env::args_os(), &mut out, &mut stderr.lock());
    let _ = out.flush();
    std::process::exit(code);
}
