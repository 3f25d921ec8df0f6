//! ExprLang demo parser speaking the line-delimited subprocess protocol on
//! standard input and output.

use std::io;

fn main() -> io::Result<()> {
    csbb_core::bindings::exprlang::serve(io::stdin().lock(), io::stdout().lock())
}
