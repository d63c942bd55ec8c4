use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use log::{Log, Metadata, Record};
use moswacp::operators::OPS_TARGET;

/// Sends operator records to a file and everything else to env_logger.
struct Router {
    inner: env_logger::Logger,
    ops: Option<Mutex<BufWriter<File>>>,
}

impl Router {
    fn is_ops(target: &str) -> bool {
        target.starts_with(OPS_TARGET)
    }
}

impl Log for Router {
    fn enabled(&self, m: &Metadata<'_>) -> bool {
        if self.ops.is_some() && Self::is_ops(m.target()) {
            m.level() <= log::Level::Debug
        } else {
            self.inner.enabled(m)
        }
    }

    fn log(&self, record: &Record<'_>) {
        match &self.ops {
            Some(out) if Self::is_ops(record.target()) => {
                if record.level() <= log::Level::Debug {
                    if let Ok(mut w) = out.lock() {
                        let _ = writeln!(w, "{}", record.args());
                    }
                }
            }
            _ => self.inner.log(record),
        }
    }

    fn flush(&self) {
        self.inner.flush();
        if let Some(out) = &self.ops {
            if let Ok(mut w) = out.lock() {
                let _ = w.flush();
            }
        }
    }
}

/// Verbosity comes from `MOSWACP_LOG` (env_logger syntax, default `warn`).
pub fn init(op_trace: Option<&Path>) -> std::io::Result<()> {
    let inner = env_logger::Builder::from_env(env_logger::Env::new().filter_or("MOSWACP_LOG", "warn")).build();
    let ops = op_trace.map(File::create).transpose()?.map(|f| Mutex::new(BufWriter::new(f)));
    let max = if ops.is_some() { inner.filter().max(log::LevelFilter::Debug) } else { inner.filter() };
    if log::set_boxed_logger(Box::new(Router { inner, ops })).is_ok() {
        log::set_max_level(max);
    }
    Ok(())
}

pub fn flush() {
    log::logger().flush();
}
