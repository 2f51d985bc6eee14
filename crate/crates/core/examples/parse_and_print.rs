//! Parse under one dialect, print under either.

use sqlmigrate::dialect::DialectProfile;
use sqlmigrate::parser::parse;
use sqlmigrate::printer::print;

fn main() -> sqlmigrate::Result<()> {
    let text = "select top 5 name, len(name) as n from users";
    let src = DialectProfile::src();
    let ast = parse(text, src)?;
    println!("{}", ast.sexpr());
    println!("{}", print(&ast, src)?);

    // TGT has no TOP; the printer says so instead of guessing.
    match print(&ast, DialectProfile::tgt()) {
        Ok(t) => println!("{t}"),
        Err(e) => println!("tgt: {e}"),
    }

    if let Err(e) = parse("SELECT a +", src) {
        println!(
            "parse error at {}..{}: {}",
            e.span.byte_start, e.span.byte_end, e.message
        );
    }
    Ok(())
}
