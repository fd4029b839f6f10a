import java.io.BufferedReader;
import java.util.Properties;
import java.util.Scanner;

class OsciSources {
  void sources(Properties props, BufferedReader reader, Scanner console) throws Exception {
    String a = System.getenv("ADD");
    String b = System.getProperty("user.cmd");
    String c = props.getProperty("data");
    String d = reader.readLine();
    String e = console.nextLine();
    String f = "ls";
    String g = a.trim();
  }
}
